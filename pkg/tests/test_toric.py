import json
from fractions import Fraction
from math import factorial

import pytest

from lgpot import series as S
from lgpot import toric as T
from lgpot.periods import LaurentPolynomial, classical_period, potential_from_period
from lgpot.series import Series

CORPUS = ["p2", "p3", "p1xp1", "f1", "f2", "dp7", "dp6"]
FANO = ["p2", "p3", "p1xp1", "f1", "dp7", "dp6"]


def geom(name):
    return T.load_corpus(name)


def coords(classes):
    return {c.coords for c in classes}


def test_enumerate_p2():
    assert coords(T.enumerate_classes(geom("p2"), 6)) == {(1,), (2,)}


def test_enumerate_p1xp1():
    assert coords(T.enumerate_classes(geom("p1xp1"), 4)) == {(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}


def test_enumerate_f2_degree_zero_tower():
    f2 = geom("f2")
    (b,) = f2.zero_degree_generators
    found = coords(T.enumerate_classes(f2, 4, zero_deg_cap=3))
    for k in range(1, 4):
        assert tuple(k * x for x in b) in found
    assert tuple(4 * x for x in b) not in found


def test_enumerate_excludes_zero_unless_asked():
    p2 = geom("p2")
    assert (0,) not in coords(T.enumerate_classes(p2, 3))
    assert (0,) in coords(T.enumerate_classes(p2, 3, include_zero=True))
    assert T.enumerate_classes(p2, 2) == []


def test_enumerate_deduplicates():
    dp6 = geom("dp6")
    cls = T.enumerate_classes(dp6, 5)
    assert len(cls) == len(coords(cls))


def brute_force_classes(g, max_ddeg, box=6):
    """Nonnegative combinations of the generators, by exhaustive search."""
    import itertools

    out = set()
    for mult in itertools.product(range(box), repeat=len(g.mori_generators)):
        c = tuple(sum(m * gen[a] for m, gen in zip(mult, g.mori_generators)) for a in range(g.picard_rank))
        if any(c) and g.ddeg(c) <= max_ddeg:
            out.add(c)
    return out


@pytest.mark.parametrize("name", FANO)
def test_enumerate_matches_brute_force(name):
    g = geom(name)
    assert coords(T.enumerate_classes(g, 5)) == brute_force_classes(g, 5)


def test_g_series_p2():
    g = T.g_series(geom("p2"), 9)
    assert g.coefficients() == [0, 2, 15, Fraction(560, 3)]


def test_g_series_p2_matches_closed_form():
    g = T.g_series(geom("p2"), 30)
    for d in range(1, 11):
        assert g[d] == Fraction(factorial(3 * d - 1), factorial(d) ** 3)


def test_g_series_p1xp1():
    g = T.g_series(geom("p1xp1"), 4)
    assert g.terms == {
        (1, 0): 1, (0, 1): 1, (1, 1): 6, (2, 0): Fraction(3, 2), (0, 2): Fraction(3, 2),
    }


def test_g_series_skips_negative_pairings():
    f1 = geom("f1")
    g = T.g_series(f1, 8)
    for cl in T.enumerate_classes(f1, 8):
        if any(x < 0 for x in cl.pairings):
            assert g.coefficient(cl.coords) == 0


@pytest.mark.parametrize("name", CORPUS)
def test_degree_one_classes_have_negative_pairing(name):
    g = geom(name)
    for cl in T.enumerate_classes(g, 1, zero_deg_cap=2):
        if cl.ddeg == 1:
            assert min(cl.pairings) < 0


@pytest.mark.parametrize("name", CORPUS)
def test_g_series_positive(name):
    g = T.g_series(geom(name), 8, zero_deg_cap=2)
    assert not g.is_zero()
    assert all(c > 0 for c in g.terms.values())


@pytest.mark.parametrize("name", FANO)
def test_fano_correction_vanishes(name):
    g = geom(name)
    assert g.is_fano
    assert all(c.is_zero() for c in T.absolute_correction(g, 8))


def test_f2_correction():
    f2 = geom("f2")
    assert not f2.is_fano
    corr = T.absolute_correction(f2, 8, zero_deg_cap=3)
    (b,) = f2.zero_degree_generators
    j = f2.pairings(b).index(-2)
    row = f2.divisor_classes[j]
    for k in range(1, 4):
        kb = tuple(k * x for x in b)
        value = Fraction(factorial(2 * k - 1), factorial(k) ** 2)
        for a in range(2):
            assert corr[a].coefficient(kb) == row[a] * value
    assert [c.coefficient(b) for c in corr] == [1, -2]
    assert [c.coefficient(tuple(3 * x for x in b)) for c in corr] == [Fraction(10, 3), Fraction(-20, 3)]


def test_mirror_map_p2():
    mm = T.relative_mirror_map(geom("p2"), 12)
    assert mm.forward[0].coefficients() == [0, 1, 6, 63, 866]
    assert mm.inverse[0].coefficients() == [0, 1, -6, 9, -56]


@pytest.mark.parametrize("name,zcap", [(n, 0) for n in FANO] + [("f2", 3)])
def test_mirror_map_round_trip(name, zcap):
    g = geom(name)
    mm = T.relative_mirror_map(g, 8, zcap)
    ident = [Series.variable(mm.forward[0].ctx, a) for a in range(g.picard_rank)]
    assert [S.substitute(f, list(mm.inverse)) for f in mm.forward] == ident
    assert [S.substitute(y, list(mm.forward)) for y in mm.inverse] == ident
    assert all(u.constant_term() == 1 for u in mm.units)


def test_fano_forward_has_no_correction():
    g = geom("p1xp1")
    gs = T.g_series(g, 6)
    mm = T.relative_mirror_map(g, 6)
    for a in range(2):
        assert mm.units[a] == S.exp(gs.scale(2))


def test_proper_potential_p2():
    p = T.proper_potential(geom("p2"), 9)
    assert p.coefficients() == [1, 2, 5, 32]
    assert p.ctx.names == ("q1",)


@pytest.mark.parametrize("name", FANO)
def test_potential_shape_and_grading(name):
    g = geom(name)
    flat = T.specialize(T.proper_potential(g, 9), g)
    assert flat.constant_term() == 1
    assert flat[1] == 0
    ddegs = {cl.ddeg for cl in T.enumerate_classes(g, 9)}
    for (k,) in flat.terms:
        assert k == 0 or k in ddegs


def test_p2_grading_multiples_of_three():
    flat = T.specialize(T.proper_potential(geom("p2"), 12))
    assert all(k % 3 == 0 for (k,) in flat.terms)


def test_specialize_refuses_degree_zero_towers():
    f2 = geom("f2")
    p = T.proper_potential(f2, 6, zero_deg_cap=3)
    assert p.constant_term() == 1
    with pytest.raises(T.SpecializationError):
        T.specialize(p, f2)


def test_two_point_invariants_p2():
    g = geom("p2")
    table = T.two_point_invariants(T.proper_potential(g, 9), g)
    assert table.get(2, 1) == 1
    assert table.get(5, 1) == 1
    assert table.get(8, 1) == 4
    assert table.get(3, 1) == 0
    assert table.modulus == 3


def test_two_point_invariants_p1xp1():
    g = geom("p1xp1")
    p = T.proper_potential(g, 8)
    table = T.two_point_invariants(p, g)
    assert table.get(1, 1) == T.specialize(p)[2]


def test_two_point_invariants_empty_tail():
    ctx = S.Context((1,), 6)
    table = T.two_point_invariants(Series.constant(ctx, 1))
    assert table.entries == {}


def test_two_point_invariants_rejects_linear_term():
    ctx = S.Context((1,), 6)
    with pytest.raises(ValueError):
        T.two_point_invariants(Series.from_coefficients(ctx, [1, 3, 1]))


def test_p1xp1_diagonal_matches_period_pipeline():
    g = geom("p1xp1")
    flat = T.specialize(T.proper_potential(g, 12), g)
    pi = classical_period(LaurentPolynomial.load(T.corpus_dir() / "p1xp1_mirror.json"), 12)
    assert flat.coefficients() == potential_from_period(pi, 12).coefficients()


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    path = T.corpus_dir() / f"{name}.json"
    doc = json.loads(path.read_text())
    g = T.ToricGeometry.from_dict(doc)
    assert g.to_dict() == doc
    assert T.ToricGeometry.from_dict(g.to_dict()) == g


def _p2_doc():
    return json.loads((T.corpus_dir() / "p2.json").read_text())


@pytest.mark.parametrize(
    "mutate,invariant",
    [
        (lambda d: d.update(picard_rank=0), "picard-rank"),
        (lambda d: d["divisors"][0].update(pairings=[2]), "column-sums"),
        (lambda d: d["divisors"][0].update({"class": [2], "pairings": [2]}), "column-sums"),
        (lambda d: d.update(mori_generators=[[-1]]), "nef-basis"),
        (lambda d: d["divisors"][1].update(pairings=[1, 0]), "shape"),
        (lambda d: d.pop("anticanonical"), "schema"),
    ],
)
def test_geometry_validation(mutate, invariant):
    doc = _p2_doc()
    mutate(doc)
    with pytest.raises(T.GeometryError) as err:
        T.ToricGeometry.from_dict(doc)
    assert err.value.invariant == invariant


def test_geometry_dual_basis_invariant():
    doc = json.loads((T.corpus_dir() / "p1xp1.json").read_text())
    doc["divisors"][0]["class"] = [0, 1]
    doc["divisors"][1]["class"] = [1, 0]
    with pytest.raises(T.GeometryError) as err:
        T.ToricGeometry.from_dict(doc)
    assert err.value.invariant in {"dual-basis", "class-sums"}


def test_corpus_env_override(tmp_path, monkeypatch):
    (tmp_path / "p2.json").write_text(json.dumps(_p2_doc() | {"name": "elsewhere"}))
    monkeypatch.setenv("LGPOT_CORPUS", str(tmp_path))
    assert T.load_corpus("p2").name == "elsewhere"
