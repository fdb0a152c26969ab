import numpy as np
import pytest

from smpnet.graph import apply_permutation
from smpnet.verify import CheckResult, format_result, run_suite, separation_traces


def rows_only(perm, obj, node_axes=None):
    """A broken action that forgets to permute the context rows."""
    if node_axes is None and isinstance(obj, np.ndarray):
        node_axes = 1
    return apply_permutation(perm, obj, node_axes=node_axes)


def test_separation_suite_passes():
    results = run_suite("separation")
    assert [r.name for r in results] == [
        "trace_power_c6_vs_2c3",
        "mpnn_readouts_coincide",
        "lifting_diagonal",
        "lifting_off_diagonal",
    ]
    assert all(r.passed for r in results)


def test_separation_traces():
    assert separation_traces() == (0, 12, 0.0, 12.0)


def test_corrupted_action_fails_named_checks():
    results = {r.name: r for r in run_suite("equivariance", action=rows_only)}
    assert not results["smp_fast_layer"].passed
    assert not results["init_local_context"].passed
    assert "FAIL equivariance/smp_fast_layer" in format_result(results["smp_fast_layer"])


def test_report_lines_and_unknown_suite():
    lines = []
    run_suite("separation", report=lines.append)
    assert len(lines) == 4 and all(line.startswith("PASS separation/") for line in lines)
    with pytest.raises(ValueError):
        run_suite("nope")


def test_format_result():
    r = CheckResult("s", "c", False, 2e-3, 1e-9, 7, 1.25, "note")
    assert format_result(r) == "FAIL s/c: worst 0.002 vs tol 1e-09 over 7 cases in 1.2s (note)"
