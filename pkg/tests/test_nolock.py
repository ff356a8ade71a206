"""Test the no-locking falsification harness."""
import math
from pathlib import Path

import numpy as np
import pytest

from mutual_independence.common.errors import DimensionError
from mutual_independence.common.io import load_model
from mutual_independence.conjectures.nolock import (
    NoLockParams,
    TrialRecord,
    ViolationCertificate,
    gen_product_extension,
    hermitian_from_params,
    locking_control_state,
    nolock_search,
    nolock_slack,
    nolock_trial,
    reproduction_command,
    run_locking_control,
    trial_state,
    write_violation_certificate,
)
from mutual_independence.jobs.pool import JobPool
from mutual_independence.quantum.sampling import random_density
from mutual_independence.quantum.state import MultipartiteState, partial_trace, tensor_product


def test_hermitian_from_params():
    """d^2 reals give a Hermitian matrix; zeros give zero."""
    h = hermitian_from_params(np.arange(9.0), 3)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(hermitian_from_params(np.zeros(4), 2), 0)


def test_extension_keeps_product_marginal():
    """Tracing X from the extension returns rho_A (x) rho_B."""
    rho_a = random_density([("A", 2)], seed=1)
    rho_b = random_density([("B", 3)], seed=2)
    rho = gen_product_extension(rho_a, rho_b, dim_x=2, dim_g=6, seed=3)
    assert rho.labels == ("X", "A", "B")
    assert np.allclose(partial_trace(rho, ("A", "B")).matrix, tensor_product(rho_a, rho_b).matrix, atol=1e-10)


def test_extension_needs_room_for_the_purifier():
    """|X||G| below the rank of the product is rejected."""
    rho_a = random_density([("A", 2)], seed=1)
    rho_b = random_density([("B", 2)], seed=2)
    with pytest.raises(DimensionError):
        gen_product_extension(rho_a, rho_b, dim_x=1, dim_g=3)


def test_trivial_register_has_zero_slack():
    """With |X| = 1 the state is the product and nothing can be locked."""
    record = nolock_trial(NoLockParams(dim_x=1), seed=0)
    assert record.log_negativity == pytest.approx(0.0, abs=1e-9)
    assert record.slack == pytest.approx(0.0, abs=1e-9)
    assert not record.violation


def test_trial_is_reproducible():
    """A trial depends only on the seed, the index and the dimensions."""
    params = NoLockParams()
    assert nolock_trial(params, seed=9, index=4) == nolock_trial(params, seed=9, index=4)
    assert nolock_trial(params, seed=9, index=4) != nolock_trial(params, seed=9, index=5)


def test_trial_state_rebuilds_record():
    """The stored record regenerates its extension."""
    record = nolock_trial(NoLockParams(), seed=2, index=1)
    value, slack = nolock_slack(trial_state(record))
    assert value == pytest.approx(record.log_negativity, abs=1e-12)
    assert slack == pytest.approx(record.slack, abs=1e-12)


def test_optimized_trial_never_decreases_negativity():
    """The ascent keeps the start when it finds nothing better."""
    record = nolock_trial(NoLockParams(optimize=True, max_iters=30), seed=1, index=0)
    assert record.optimized
    assert record.log_negativity >= record.start_value - 1e-12
    assert len(record.theta) in (0, 64)
    value, _ = nolock_slack(trial_state(record))
    assert value == pytest.approx(record.log_negativity, abs=1e-9)


def test_campaign_summary():
    """Random extensions stay within the conjectured bound and every trial is binned."""
    summary = nolock_search(NoLockParams(), trials=12, seed=3)
    assert summary.aborted == 0
    assert summary.violations == []
    assert summary.min_slack == summary.argmin.slack
    assert summary.min_slack >= -1e-7
    assert sum(b.count for b in summary.histogram) == 12
    assert summary.to_csv().startswith("low,high,count\n")


def test_campaign_does_not_depend_on_workers():
    """Two workers produce the same summary as the inline run."""
    params = NoLockParams()
    inline = nolock_search(params, trials=6, seed=11, pool=JobPool(jobs=1))
    parallel = nolock_search(params, trials=6, seed=11, pool=JobPool(jobs=2, chunk_size=2))
    assert inline == parallel


def test_start_index_selects_trial():
    """A one-trial campaign at index k reruns trial k."""
    params = NoLockParams()
    summary = nolock_search(params, trials=1, seed=4, start=3)
    assert summary.argmin == nolock_trial(params, seed=4, index=3)


def test_reproduction_command():
    """The command names dims, index, seed and the ascent options."""
    params = NoLockParams(optimize=True, max_iters=50)
    record = nolock_trial(NoLockParams(), seed=8, index=2)
    command = reproduction_command(params, record)
    assert command == "mutind nolock --dims 2,2,2,4 --trials 1 --start-index 2 --seed 8 --optimize --max-iters 50 --format json"


def test_violation_certificate_files(tmp_path: Path):
    """A certificate and the violating state are written and load back."""
    params = NoLockParams()
    record = nolock_trial(params, seed=5, index=0).model_copy(update={"slack": -1.0})
    assert isinstance(record, TrialRecord) and record.violation
    certificate = write_violation_certificate(params, record, tmp_path)
    assert (tmp_path / "certificate_5_0.json").exists()
    state = load_model(MultipartiteState, Path(certificate.state_file))
    assert state.labels == ("X", "A", "B")
    assert load_model(ViolationCertificate, tmp_path / "certificate_5_0.json").command == certificate.command


@pytest.mark.parametrize("d,flagged", [(2, False), (3, True), (4, True)])
def test_locking_control(d, flagged):
    """The planted control has slack 1 - log2 d and is flagged above d = 2."""
    result = run_locking_control(d)
    assert result.slack == pytest.approx(1 - math.log2(d), abs=1e-9)
    assert result.violation is flagged


def test_locking_control_has_correlated_marginal():
    """The control is not an extension of a product state."""
    control = locking_control_state(3)
    marginal = partial_trace(control, ("A", "B")).matrix
    product = np.kron(partial_trace(control, "A").matrix, partial_trace(control, "B").matrix)
    assert not np.allclose(marginal, product)
