from pathlib import Path

import numpy as np
import pytest

from nbldpc.channel import Convention, IntrinsicInfo
from nbldpc.code import enumerate_codewords, load_code, random_regular_code, random_tree_code
from nbldpc.gf import field_new
from nbldpc.oracle import (
    OracleError,
    brute_check_node,
    brute_check_row,
    local_configurations,
    ml_decode,
    neighbourhood,
    tree_aposteriori_oracle,
    verify_pigeonhole,
)

DATA = Path(__file__).parent / "data"


def test_hand_enumerated_min_max_gf4():
    gf = field_new(2)
    other = np.array([[0, 1, 2, 3], [0, 3, 1, 2]], dtype=float)
    alpha = np.vstack([np.zeros(4), other])
    # completions x1 ^ x2 = a, worked by hand:
    #   a=1: (0,1)->3 (1,0)->1 (2,3)->2 (3,2)->3
    #   a=2: (0,2)->1 (2,0)->2 (1,3)->2 (3,1)->3
    #   a=3: (0,3)->2 (3,0)->3 (1,2)->1 (2,1)->3
    assert brute_check_row("min_max", alpha, [1, 1, 1], 0, gf).tolist() == [0, 1, 1, 1]
    assert brute_check_node("min_max", alpha, [1, 1, 1], 0, 2, gf) == 1


def test_local_configurations_satisfy_check():
    gf = field_new(2)
    labels = [1, 2, 3]
    cfgs = local_configurations(labels, 1, 2, gf)
    assert len(cfgs) == 4
    assert (cfgs[:, 1] == 2).all()
    for c in cfgs:
        assert gf.mul(1, c[0]) ^ gf.mul(2, c[1]) ^ gf.mul(3, c[2]) == 0


def test_grid_oracle_agrees_with_configuration_list():
    gf = field_new(2)
    rng = np.random.default_rng(0)
    alpha = rng.uniform(0, 3, (4, 4))
    labels = [1, 3, 2, 2]
    for target in range(4):
        row = brute_check_row("min_sum", alpha, labels, target, gf)
        for a in range(4):
            cfgs = local_configurations(labels, target, a, gf)
            others = [j for j in range(4) if j != target]
            ref = min(sum(alpha[j, c[j]] for j in others) for c in cfgs)
            assert row[a] == pytest.approx(ref)


def test_degree_two_single_completion():
    gf = field_new(3)
    alpha = np.arange(16, dtype=float).reshape(2, 8)
    h1, h2 = 5, 3
    row = brute_check_row("min_sum", alpha, [h1, h2], 0, gf)
    for a in range(8):
        assert row[a] == alpha[1, gf.mul(gf.inv(h2), gf.mul(h1, a))]


def test_oracle_errors():
    gf = field_new(4)
    with pytest.raises(OracleError):
        brute_check_row("min_sum", np.zeros((7, 16)), [1] * 7, 0, gf)
    with pytest.raises(OracleError):
        brute_check_row("median", np.zeros((3, 16)), [1] * 3, 0, gf)
    with pytest.raises(OracleError):
        brute_check_row("p_norm", np.zeros((3, 16)), [1] * 3, 0, gf)


def test_ml_single_check_hand_fixture():
    code = load_code(DATA / "gf4_single_check.nbalist")
    g = np.array([[0.0, 1.0, 2.0, 3.0], [2.5, 0.0, 4.0, 0.5]])
    # codewords (a, 3a): (0,0)=2.5 (1,3)=1.5 (2,1)=2.0 (3,2)=7.0
    assert ml_decode(code, IntrinsicInfo(g, Convention.STAR_REF)).tolist() == [1, 3]
    shifted = g + np.array([[4.0], [-0.5]])
    assert ml_decode(code, IntrinsicInfo(shifted, Convention.LOGPROB)).tolist() == [1, 3]


def test_ml_noiseless():
    code = random_regular_code(8, 2, 4, field_new(2), seed=1)
    word = enumerate_codewords(code)[5]
    g = np.ones((code.N, code.q))
    g[np.arange(code.N), word] = 0
    assert np.array_equal(ml_decode(code, IntrinsicInfo(g, Convention.STAR_REF)), word)


def test_ml_ties_to_smallest_codeword():
    code = load_code(DATA / "gf4_single_check.nbalist")
    assert ml_decode(code, IntrinsicInfo(np.zeros((2, 4)), Convention.STAR_REF)).tolist() == [0, 0]


def test_single_check_tree_limit():
    code = load_code(DATA / "gf4_single_check.nbalist")
    g = np.array([[0.0, 1.0, 2.0, 3.0], [2.5, 0.0, 4.0, 0.5]])
    lim = tree_aposteriori_oracle(code, IntrinsicInfo(g, Convention.STAR_REF), 0)
    labels = [h for _, h in code.check_rows[0]]
    expect = g[0] + brute_check_row("min_sum", g, labels, 0, code.field)
    assert np.allclose(lim.min_sum, expect)
    # the whole code is the neighbourhood of node 0, so only the zero word vanishes on it
    assert np.allclose(lim.min_sum_0, expect - g[:, 0].sum())


def test_tree_oracle_rejects_cycles():
    code = random_regular_code(8, 2, 4, field_new(2), seed=0)
    with pytest.raises(OracleError):
        tree_aposteriori_oracle(code, IntrinsicInfo(np.zeros((8, 4)), Convention.STAR_REF), 0)


def test_neighbourhood():
    code = random_tree_code(8, field_new(2), seed=3)
    for n in range(code.N):
        near = neighbourhood(code, n)
        assert n in near
        assert len(near) == 1 + sum(len(code.check_rows[m]) - 1 for m in code.var_adjacency[n])


def test_pigeonhole_full_set_with_zero():
    gf = field_new(3)
    h, h1, h2 = 3, 6, 2
    rep = verify_pigeonhole(gf, h, h1, h2, range(8), [0])
    assert rep.ok
    for a, (x, y) in rep.witnesses.items():
        assert y == 0
        assert x == gf.mul(gf.inv(h1), gf.mul(h, a))


def test_pigeonhole_fails_below_threshold():
    gf = field_new(2)
    rep = verify_pigeonhole(gf, 1, 1, 1, [0], [0])
    assert not rep.ok
    assert rep.violations == [1, 2, 3]


def test_pigeonhole_random_gf8():
    gf = field_new(3)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n1 = int(rng.integers(1, 9))
        n2 = int(rng.integers(9 - n1, 9))
        d1 = rng.choice(8, n1, replace=False)
        d2 = rng.choice(8, n2, replace=False)
        h, h1, h2 = rng.integers(1, 8, 3)
        assert verify_pigeonhole(gf, int(h), int(h1), int(h2), d1, d2).ok


def test_pigeonhole_zero_coefficient():
    with pytest.raises(OracleError):
        verify_pigeonhole(field_new(2), 0, 1, 1, [0], [0])
