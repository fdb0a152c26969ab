import numpy as np
import pytest

from smpnet.bench import BenchRow, bench, fixed_degree_graph, rows_to_csv, scaling_exponent


def test_fixed_degree_graph():
    g = fixed_degree_graph(np.random.default_rng(0), 32, 4.0)
    assert g.n == 32 and g.m == 64
    assert g.d_avg == pytest.approx(4.0)


def test_bench_rows():
    rows = bench(sizes=(6, 8), width=2, repeats=2)
    assert [(r.variant, r.n) for r in rows] == [
        ("mpnn", 6), ("smp-fast", 6), ("smp-default", 6),
        ("mpnn", 8), ("smp-fast", 8), ("smp-default", 8),
    ]
    assert all(r.median_us > 0 and r.c == 2 for r in rows)


def test_scaling_exponent_recovers_power_law():
    rows = [BenchRow("smp-fast", n, 2 * n, 4, 3.0 * n**2) for n in (16, 32, 64)]
    assert scaling_exponent(rows) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        scaling_exponent(rows[:1])


def test_rows_to_csv():
    text = rows_to_csv([BenchRow("mpnn", 4, 4, 2, 12.345)])
    assert text == "variant,n,m,c,median_us\nmpnn,4,4,2,12.3\n"
