import math

import pytest

import awharness as aw


PR = dict(A=0.5, B=-0.3, C=0.4, D=0.2, q=0.5)


def params():
    return aw.validate(PR["A"], PR["B"], PR["C"], PR["D"], PR["q"])


def test_validate_and_roundtrip():
    p = params()
    assert p.q == 0.5
    assert p.A == complex(0.5, 0.0)
    q = aw.params_from_json(aw.params_to_json(p))
    assert q.A == p.A and q.B == p.B and q.C == p.C and q.D == p.D
    assert q.q == p.q


def test_inadmissible_raises():
    with pytest.raises(aw.Inadmissible):
        aw.validate(3.0, 0.2, 0.5, 0.1, 0.5)


def test_harness_constants():
    h = aw.harness_params(params())
    assert abs(h.eta - (-0.2879319147079058)) < 1e-12
    assert abs(h.theta - (-0.4276276953606822)) < 1e-12
    assert abs(h.sigma - (-0.07455268389662027)) < 1e-12
    assert abs(h.tau - 0.03976143141153082) < 1e-12
    assert abs(h.gamma - 0.5089463220675945) < 1e-12


def test_moments():
    p = params()
    assert abs(aw.e_y(p, 1.08) - 0.4265469874151286) < 1e-12
    assert abs(aw.var_y(p, 1.08) - 0.1115808753741255) < 1e-12
    assert abs(aw.cov_y(p, 0.33, 1.08) - 0.050464349644824685) < 1e-12


def test_marginal_measure():
    m = aw.marginal(params(), 1.08)
    assert m.has_continuous
    total = aw.integrate_measure(m, lambda y: 1.0)
    assert abs(total - 1.0) < 1e-9
    mu = aw.integrate_measure(m, lambda y: y)
    assert abs(mu - aw.e_y(params(), 1.08)) < 1e-9


def test_constructor_family():
    p = aw.q_meixner(0.8, 0.3, 0.2)
    h = aw.harness_params(p)
    assert abs(h.theta - 0.8) < 1e-12
    assert abs(h.tau - 0.3) < 1e-12
    assert abs(h.gamma - 0.2) < 1e-12
    assert abs(h.eta) < 1e-12 and abs(h.sigma) < 1e-12


def test_sampling_deterministic():
    p = params()
    a = aw.sample_path(p, [0.4, 0.9, 1.8], seed=7, stream=3)
    b = aw.sample_path(p, [0.4, 0.9, 1.8], seed=7, stream=3)
    assert a.values == b.values
    c = aw.sample_path(p, [0.4, 0.9, 1.8], seed=7, stream=4)
    assert a.values != c.values
    assert len(a.values) == 3 and a.seed == 7 and a.stream == 3


def test_martingale_checks():
    p = params()
    assert aw.check_q_commutation(p, 20).max_residual < 1e-11
    assert aw.check_projection(p, 0.33, 1.08, 0.42, 6).max_residual < 1e-8


def test_discrete_process():
    sp = aw.discrete_spec(0.8, 1.2, 0.05, 0.55, 4)
    dp = aw.DiscreteProcess(sp)
    t = 0.85
    assert abs(sum(dp.marginal_k(t, k) for k in range(sp.N + 1)) - 1) < 1e-12
    tr = dp.sample_path([0.75, 0.85, 1.0], seed=5)
    assert len(tr.values) == 3


def test_bridge_masses():
    p = aw.validate(0.45, 0.25, 0.5, -0.3, 0.4)
    be = aw.bridge_endpoints(p)
    total = sum(a.mass for a in be.left.atoms)
    assert abs(total - 1.0) < 1e-9
    assert min(a.mass for a in be.left.atoms) >= 0.0
    assert be.right.deterministic
    expected = (1 / 0.45 + 1 / 0.25) / math.sqrt(1 - 0.4)
    assert abs(be.right.value - expected) < 1e-12
