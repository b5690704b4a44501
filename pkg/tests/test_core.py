import itertools

import numpy as np
import pytest

from mrioembed.core import (
    DEFAULT_TAXONOMY,
    SECTORS,
    CountryCode,
    MrioError,
    MrioTable,
    analysis_countries,
    derive_national_accounts,
    region_counts,
    sector,
)
from mrioembed.synthetic import random_world

from conftest import TOY_EXPORTS, TOY_IMPORTS


def naive_accounts(table, home):
    """Brute force: walk every labelled cell and bin it."""
    ns = table.n_sectors
    labels = [(c, s) for c in table.countries for s in table.sectors]
    fu = [(c, f) for c in table.countries for f in range(table.n_final)]
    Zdom = np.zeros((ns, ns))
    e = np.zeros(ns)
    m = np.zeros(ns)
    ifu = dfu = 0.0
    for r, (oc, os_) in enumerate(labels):
        i = table.sectors.index(os_)
        for col, (dc, ds) in enumerate(labels):
            v = table.Z[r, col]
            j = table.sectors.index(ds)
            if oc == home and dc == home:
                Zdom[i, j] += v
            elif oc == home:
                e[i] += v
            elif dc == home:
                m[j] += v
        for col, (dc, _) in enumerate(fu):
            v = table.F[r, col]
            if oc == home and dc == home:
                dfu += v
            elif oc == home:
                e[i] += v
            elif dc == home:
                ifu += v
    return Zdom, e, m, ifu, dfu


def test_sector_registry():
    assert len(SECTORS) == 34
    assert [s.index for s in SECTORS] == list(range(34))
    assert "c35" not in {s.code for s in SECTORS}
    with pytest.raises(MrioError, match="excluded"):
        sector("c35")


def test_taxonomy():
    countries = analysis_countries()
    assert len(countries) == 24
    assert region_counts(countries) == {"Core": 10, "GIPS": 4, "East": 10}
    assert CountryCode.lookup("USA").region == "NonEU"
    assert CountryCode.lookup("HUN").region == "East"


def test_two_country_all_ones():
    k = 3
    t = MrioTable(2000, ("AAA", "BBB"), ("c1", "c2"), np.ones((4, 4)), np.ones((4, 2 * k)), k)
    acc = derive_national_accounts(t, "AAA")
    np.testing.assert_array_equal(acc.Zdom, [[1, 1], [1, 1]])
    np.testing.assert_array_equal(acc.e, [2 + k, 2 + k])
    np.testing.assert_array_equal(acc.m, [2, 2])
    assert acc.ifu == 2 * k
    assert acc.dfu == 2 * k
    assert acc.e_foreign.shape == (2, 2)

    Zdom, e, m, ifu, dfu = naive_accounts(t, "AAA")
    np.testing.assert_array_equal(acc.Zdom, Zdom)
    np.testing.assert_array_equal(acc.e, e)
    np.testing.assert_array_equal(acc.m, m)
    assert (acc.ifu, acc.dfu) == (ifu, dfu)


def test_closed_economy():
    Z = np.zeros((4, 4))
    Z[:2, :2] = [[1, 2], [3, 4]]
    Z[2:, 2:] = 5
    F = np.zeros((4, 2))
    F[:2, 0] = 1
    F[2:, 1] = 1
    acc = derive_national_accounts(MrioTable(2000, ("AAA", "BBB"), ("c1", "c2"), Z, F), "AAA")
    np.testing.assert_array_equal(acc.e, 0)
    np.testing.assert_array_equal(acc.m, 0)
    assert acc.ifu == 0


def test_four_sector_example(toy_table, toy_accounts):
    np.testing.assert_array_equal(toy_accounts.e, TOY_EXPORTS)
    np.testing.assert_array_equal(toy_accounts.m, TOY_IMPORTS)
    outside = toy_accounts.e.sum() + toy_accounts.m.sum() + toy_accounts.ifu
    assert outside == 200
    assert toy_accounts.domestic_offdiag().sum() == 200


def test_unknown_country(toy_table):
    with pytest.raises(MrioError, match="country not in table"):
        derive_national_accounts(toy_table, "XYZ")


def test_malformed():
    with pytest.raises(MrioError, match="malformed table"):
        MrioTable(2000, ("AAA",), ("c1", "c2"), np.ones((3, 3)), np.ones((2, 1)))
    with pytest.raises(MrioError, match="negative"):
        MrioTable(2000, ("AAA",), ("c1",), -np.ones((1, 1)), np.ones((1, 1)))


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_and_conservation(seed):
    t = random_world(2000, ("AAA", "BBB", "RoW"), ("c1", "c2", "c3"), n_final=2, seed=seed)
    total = t.grand_total()
    out_side = in_side = 0.0
    for c in t.countries:
        acc = derive_national_accounts(t, c)
        Zdom, e, m, ifu, dfu = naive_accounts(t, c)
        np.testing.assert_allclose(acc.Zdom, Zdom, rtol=1e-12)
        np.testing.assert_allclose(acc.e, e, rtol=1e-12)
        np.testing.assert_allclose(acc.m, m, rtol=1e-12)
        assert acc.ifu == pytest.approx(ifu, rel=1e-12)
        assert acc.dfu == pytest.approx(dfu, rel=1e-12)
        assert (acc.e >= acc.e_foreign.sum(axis=1) - 1e-12).all()
        out_side += acc.Zdom.sum() + acc.e.sum() + acc.dfu
        in_side += acc.Zdom.sum() + acc.m.sum() + acc.ifu + acc.dfu
    # every cell is domestic, an export of its origin, or an import of its destination
    assert out_side == pytest.approx(total, rel=1e-6)
    assert in_side == pytest.approx(total, rel=1e-6)


def test_slicing_order_independent():
    t = random_world(2000, ("AAA", "BBB", "CCC"), ("c1", "c2"), seed=1)
    first = [derive_national_accounts(t, c) for c in ("AAA", "BBB")]
    second = [derive_national_accounts(t, c) for c in ("BBB", "AAA")][::-1]
    for a, b in zip(first, second):
        for attr in ("Zdom", "e", "m", "e_foreign", "e_foreign_final"):
            np.testing.assert_array_equal(getattr(a, attr), getattr(b, attr))
        assert (a.ifu, a.dfu) == (b.ifu, b.dfu)


def test_rest_of_world_switch():
    t = random_world(2000, ("AAA", "BBB", "RoW"), ("c1", "c2"), seed=2)
    with_row = derive_national_accounts(t, "AAA")
    without = derive_national_accounts(t, "AAA", include_row_partner=False)
    assert without.partners == ("BBB",)
    assert with_row.partners == ("BBB", "RoW")
    assert (without.e < with_row.e).all()
    # imports are unaffected by the switch
    np.testing.assert_array_equal(without.m, with_row.m)


def test_taxonomy_defaults_cover_region_sets():
    assert set(DEFAULT_TAXONOMY) == {
        "AUT", "BEL", "DEU", "DNK", "FIN", "FRA", "GBR", "ITA", "NLD", "SWE",
        "GRC", "IRL", "PRT", "ESP",
        "BGR", "CZE", "EST", "HUN", "LTU", "LVA", "POL", "ROU", "SVK", "SVN",
    }


def test_permuted_accounts_roundtrip(toy_accounts):
    order = [2, 0, 3, 1]
    p = toy_accounts.permuted(order)
    inv = np.argsort(order)
    back = p.permuted(list(inv))
    np.testing.assert_array_equal(back.Zdom, toy_accounts.Zdom)
    np.testing.assert_array_equal(back.e_foreign, toy_accounts.e_foreign)
    assert list(itertools.chain(back.sectors)) == list(toy_accounts.sectors)
