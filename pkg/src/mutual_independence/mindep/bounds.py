"""Assembly of every lower-bound route and both upper bounds into one report."""
from collections.abc import Sequence

from mutual_independence.common.logger import logger
from mutual_independence.jobs.pool import JobPool
from mutual_independence.mindep.exact import LabelSplit, check_exact_mi
from mutual_independence.mindep.hashing import is_maximally_correlated, maxcorr_hashing_bound
from mutual_independence.mindep.report import ER_PPT_CONDITION, IndependenceReport
from mutual_independence.mindep.search import SplitDims, split_search_lower
from mutual_independence.quantum.measures import Cut, bipartition, esq_upper, rel_ent_ppt
from mutual_independence.quantum.state import MultipartiteState, group_subsystems


def label_splits(alice: Sequence[str], bob: Sequence[str]) -> list[LabelSplit]:
    """Every split keying one label of each side and shielding the others; empty when both sides hold one label."""
    if len(alice) == 1 and len(bob) == 1:
        return []
    return [
        LabelSplit(
            alpha=(x,),
            a=tuple(label for label in alice if label != x),
            beta=(y,),
            b=tuple(label for label in bob if label != y),
        )
        for x in alice
        for y in bob
    ]


def mi_bounds(
    state: MultipartiteState,
    cut: Cut = ("A", "B"),
    declared: Sequence[LabelSplit] = (),
    split_dims: SplitDims | None = None,
    include_er_ppt: bool = True,
    seed: int | None = None,
    pool: JobPool | None = None,
) -> IndependenceReport:
    """
    Sandwich the mutual independence of a bipartite state.

    The lower bound is the best of the exact check on every declared label split (every
    ``label_splits`` of the cut when none is declared), the hashing bound when the state is
    maximally correlated, and the split search (full split by default). The upper
    bounds are the squashed-entanglement heuristic and, flagged as conditional, the PPT relative
    entropy of entanglement.

    :param MultipartiteState state: State whose labels are split by ``cut``
    :param tuple cut: Alice's and Bob's labels
    :param Sequence declared: Label splits to test for exact mutual independence
    :param SplitDims split_dims: Factor dimensions of the split search, ``alpha = A, beta = B`` by default
    :param bool include_er_ppt: Whether to compute the conditional E_r-PPT bound
    :param int seed: Seed of every randomized route
    :param JobPool pool: Pool running restarts and trials

    :return: Report with provenance of every value
    :rtype: IndependenceReport
    """
    a, b = bipartition(state, cut)
    grouped = group_subsystems(state, {"A": a, "B": b}).as_density()
    da, db = grouped.shape
    split_dims = split_dims or SplitDims(alpha=da, beta=db)

    search = split_search_lower(state, split_dims, cut=cut, seed=seed, pool=pool).report
    routes: list[tuple[float, str, float, float]] = []
    for split in declared:
        if set(split.alice) != set(a) or set(split.bob) != set(b):
            logger.warning(f"⚠️ Declared split {split.model_dump()} does not match the cut, skipped")
            continue
        check = check_exact_mi(state, split)
        if check.is_exact:
            routes.append((check.mi_half, f"exact-MI on key {'+'.join(split.key)}", 0.0, check.mi_half))
    if not declared:
        for split in label_splits(a, b):
            check = check_exact_mi(state, split)
            if check.is_exact:
                method = f"exact-MI on label split, key {'+'.join(split.key)}"
                routes.append((check.mi_half, method, 0.0, check.mi_half))
    if is_maximally_correlated(grouped):
        hashing = maxcorr_hashing_bound(grouped)
        routes.append((hashing.bound, "hashing on a maximally correlated state", 0.0, 0.5 * hashing.coherent_info))
    routes.append((search.lower_bound, search.lower_method, search.residual_independence, search.mi_half))
    lower, method, residual, mi_half = max(routes, key=lambda route: route[0])

    esq = esq_upper(state, cut, seed=seed, pool=pool)
    provenance = {"lower_bound": method, "upper_esq": esq.method}
    er_ppt = None
    if include_er_ppt:
        er_ppt = rel_ent_ppt(state, cut, seed=seed, pool=pool).value
        provenance["upper_er_ppt_conjectural"] = f"E_r-PPT, {ER_PPT_CONDITION}"
    logger.info(f"🧮 Mutual independence in [{lower:.6f}, {esq.value:.6f}] via {method}")
    return IndependenceReport(
        lower_bound=lower,
        lower_method=method,
        residual_independence=residual,
        mi_half=mi_half,
        trace_residual=search.trace_residual if method == search.lower_method else None,
        upper_esq=esq.value,
        upper_er_ppt_conjectural=er_ppt,
        provenance=provenance,
    )
