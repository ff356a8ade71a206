"""Expected-value checks of the shipped example corpus."""
from collections.abc import Callable
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from mutual_independence.classical.decomposition import optimal_rate_hlj
from mutual_independence.classical.distribution import JointDistribution, classical_mi
from mutual_independence.classical.privacy import classical_mindep_rate
from mutual_independence.common.io import load_model
from mutual_independence.common.logger import logger
from mutual_independence.compression.rates import rate_sum_identity_check
from mutual_independence.mindep.exact import LabelSplit, check_exact_mi
from mutual_independence.mindep.hashing import maxcorr_hashing_bound
from mutual_independence.quantum.entropy import mutual_info, vn_entropy
from mutual_independence.quantum.measures import log_negativity, rel_ent_ppt
from mutual_independence.quantum.state import MultipartiteState


RESOURCES = Path(__file__).parent / "resources"
MANIFEST = RESOURCES / "selftest.json"


class SelftestCase(BaseModel):
    """One expected value of one shipped file."""

    model_config = ConfigDict(frozen=True)

    name: str
    file: str
    kind: Literal["state", "distribution"]
    quantity: str
    args: dict[str, list[str]] = Field(default_factory=dict)
    split: str | None = None
    expected: float
    tol: float = Field(..., gt=0)


class SelftestManifest(BaseModel):
    """List of cases, file names relative to the manifest."""

    model_config = ConfigDict(frozen=True)

    cases: list[SelftestCase]


class CaseResult(BaseModel):
    """Computed value of a case and whether it matches."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: float
    expected: float
    tol: float
    passed: bool


class SelftestReport(BaseModel):
    """Outcome of every case."""

    model_config = ConfigDict(frozen=True)

    results: list[CaseResult]

    @property
    def passed(self) -> bool:
        """Whether every case matched."""
        return all(r.passed for r in self.results)


def _cut(args: dict[str, list[str]]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    return tuple(args["a"]), tuple(args["b"])


def _split(case: SelftestCase, root: Path) -> LabelSplit:
    return load_model(LabelSplit, root / case.split)


STATE_QUANTITIES: dict[str, Callable[[MultipartiteState, SelftestCase, Path], float]] = {
    "entropy": lambda s, c, _: vn_entropy(s, c.args["labels"]),
    "mutual_info": lambda s, c, _: mutual_info(s, c.args["a"], c.args["b"]),
    "log_negativity": lambda s, c, _: log_negativity(s, _cut(c.args)),
    "rel_ent_ppt": lambda s, c, _: rel_ent_ppt(s, _cut(c.args)).value,
    "hashing_bound": lambda s, c, _: maxcorr_hashing_bound(s, _cut(c.args)).bound,
    "exact_mi_half": lambda s, c, root: check_exact_mi(s, _split(c, root)).mi_half,
    "rate_identity_gap": lambda s, c, root: rate_sum_identity_check(s, _split(c, root)).gap,
}

DISTRIBUTION_QUANTITIES: dict[str, Callable[[JointDistribution, SelftestCase, Path], float]] = {
    "entropy": lambda p, c, _: p.entropy(c.args["labels"]),
    "mutual_info": lambda p, c, _: classical_mi(p, c.args["a"], c.args["b"]),
    "optimal_rate_hlj": lambda p, c, _: optimal_rate_hlj(p, c.args["a"]),
    "protocol_bound": lambda p, c, _: _protocol_bound(p, c.args["a"][0], c.args["b"][0]),
}


def _protocol_bound(dist: JointDistribution, x: str, y: str) -> float:
    size_x, size_y = (dist.alphabets[i].size for i in dist.axes((x, y)))
    return classical_mindep_rate(dist, np.eye(size_x), np.eye(size_y), x=x, y=y).protocol_bound


def _evaluate(case: SelftestCase, root: Path) -> float:
    path = root / case.file
    if case.kind == "state":
        return float(STATE_QUANTITIES[case.quantity](load_model(MultipartiteState, path), case, root))
    return float(DISTRIBUTION_QUANTITIES[case.quantity](load_model(JointDistribution, path), case, root))


def run_selftest(manifest: Path = MANIFEST) -> SelftestReport:
    """
    Evaluate every case of ``manifest`` and compare with its expected value.

    :param Path manifest: Manifest file, the shipped one by default

    :return: Per-case results
    :rtype: SelftestReport
    """
    manifest = Path(manifest)
    cases = load_model(SelftestManifest, manifest).cases
    results = []
    for case in cases:
        value = _evaluate(case, manifest.parent)
        passed = abs(value - case.expected) <= case.tol
        results.append(CaseResult(name=case.name, value=value, expected=case.expected, tol=case.tol, passed=passed))
        if passed:
            logger.info(f"✅ {case.name}: {value:.12g}")
        else:
            logger.error(f"❌ {case.name}: {value!r}, expected {case.expected!r} within {case.tol:g}")
    return SelftestReport(results=results)
