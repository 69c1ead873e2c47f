"""Instance families, monochromatic search, certificates, Ramsey numbers."""

import itertools
import json
import random

import pytest

from expramsey.colourings import (
    ConstColouring,
    LogStarColouring,
    TableColouring,
    parse_colouring,
)
from expramsey.errors import BudgetExceeded, ParseError
from expramsey.search import (
    Certificate,
    export_dimacs,
    exp_ramsey_number,
    family_from_descriptor,
    find_monochromatic,
    find_monochromatic_grid,
    ordered_fu_search,
    parse_family,
    vdw_number,
    verify_certificate,
)
from expramsey.search import _exp_triples_upto
from expramsey.tower import parse_term


# ---------------------------------------------------------------------------
# enumeration orders (frozen)

def test_exptriple_order_bound_16():
    fam = parse_family("exptriple", 16)
    assert [i.generators for i in fam.instances()] == [
        (2, 2), (2, 3), (3, 2), (2, 4), (4, 2)]


def test_schur_order_bound_4():
    fam = parse_family("schur", 4)
    assert [i.generators for i in fam.instances()] == [
        (1, 1), (1, 2), (2, 2), (1, 3)]


def test_expquad_order_is_b_then_a():
    fam = parse_family("expquad", 5)
    gens = [i.generators for i in fam.instances()]
    assert gens == [(a, b) for b in range(2, 6) for a in range(2, b + 1)]
    assert fam.count() == len(gens) == 10


def test_exptriple_strict_flag_drops_diagonal():
    fam = parse_family("exptriple:strict=1", 16)
    gens = [i.generators for i in fam.instances()]
    assert (2, 2) not in gens and (4, 2) in gens
    assert fam.count() == len(gens)


def test_logcond_family_defaults_r():
    assert parse_family("exptriple-logcond", 100).descriptor()["r"] == 1
    assert parse_family("exptriple-logcond:r=3", 100).descriptor()["r"] == 3
    # the caller-side default wins only when the descriptor leaves r out
    assert parse_family("exptriple-logcond", 100, default_r=2).descriptor()["r"] == 2
    fam = parse_family("exptriple-logcond:r=1", 100)
    # membership: a,b >= 2, a^b <= bound, log2 a <= b
    gens = {i.generators for i in fam.instances()}
    assert (2, 2) in gens
    assert (5, 2) not in gens  # log2 5 > 2
    assert (4, 2) in gens      # log2 4 = 2, boundary included
    assert all(p <= 100 for _, p in gens)


def test_counts_match_enumeration_everywhere():
    specs = [("exptriple", 50), ("exptriple:strict=1", 50), ("expquad", 9),
             ("schur", 11), ("schurplusexp", 12), ("shape:m=2,edges=1-2", 5),
             ("fep:m=2,w=1", 5), ("diffpair:seq=5^n,nmax=2", 40),
             ("grid:len=3", 12)]
    for spec, bound in specs:
        fam = parse_family(spec, bound)
        insts = list(fam.instances())
        assert fam.count() == len(insts), spec
        # nth agrees with the walk where random access is defined
        for i in (0, len(insts) // 2, len(insts) - 1):
            assert fam.nth(i).generators == insts[i].generators, (spec, i)


def test_family_descriptor_round_trip():
    for spec, bound in [("exptriple", 30), ("schurplusexp", 10),
                        ("diffpair:seq=n*2^n,nmax=3", 40),
                        ("shape:m=2,edges=1-2", 5)]:
        fam = parse_family(spec, bound)
        clone = family_from_descriptor(fam.descriptor())
        assert clone.descriptor() == fam.descriptor()
        assert [i.generators for i in clone.instances()] == \
               [i.generators for i in fam.instances()]


# ---------------------------------------------------------------------------
# find_monochromatic

def test_const_colouring_first_counterexample():
    cert = find_monochromatic("const:k=1", "exptriple", 16)
    assert cert.result["type"] == "Counterexample"
    wit = cert.result["witness"]
    assert wit["generators"] == [2, 2]
    assert {e["value"] for e in wit["elements"]} == {"2", "4"}
    assert cert.instances_checked == 1


def test_logstar_avoids_logcond_small():
    cert = find_monochromatic("logstar:r=1", "exptriple-logcond", 2**16)
    assert cert.verified
    assert verify_certificate(cert)


def test_first_witness_respects_enumeration_order():
    # plant colours so the third instance (3,2) is the first monochromatic one
    f = TableColouring([1, 1, 1, 2, 1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1], k=2)
    cert = find_monochromatic(f, parse_family("exptriple", 16))
    assert cert.result["witness"]["generators"] == [3, 2]
    assert cert.instances_checked == 3


def test_schurplusexp_fast_path_matches_brute_walk():
    rng = random.Random(41)
    bound = 60
    fam = parse_family("schurplusexp", bound)

    def brute(colouring):
        for idx, inst in enumerate(fam.instances()):
            cols = {colouring.colour(v) for v in inst.distinct_values()}
            if len(cols) == 1:
                return idx, inst.generators
        return None

    for trial in range(30):
        table = [rng.randint(1, 3) for _ in range(bound)]
        f = TableColouring(table, k=3)
        cert = find_monochromatic(f, parse_family("schurplusexp", bound))
        expect = brute(f)
        if expect is None:
            assert cert.verified, trial
            assert cert.instances_checked == fam.count()
        else:
            wit = cert.result["witness"]
            assert tuple(wit["generators"]) == tuple(expect[1]), trial
            assert cert.instances_checked == expect[0] + 1, trial


def test_quad_fast_path_instances_checked():
    fam = parse_family("expquad", 2**6)
    cert = find_monochromatic(LogStarColouring(1), fam)
    assert cert.verified
    assert cert.instances_checked == fam.count()
    assert verify_certificate(cert)


def test_threads_do_not_change_the_certificate():
    one = find_monochromatic("logstar:r=1", "exptriple", 4096, threads=1)
    two = find_monochromatic("logstar:r=1", "exptriple", 4096, threads=2)
    assert one.to_json() == two.to_json()
    a = find_monochromatic("const:k=2", "schur", 50, threads=1)
    b = find_monochromatic("const:k=2", "schur", 50, threads=2)
    assert a.to_json() == b.to_json()


def test_budget_exhaustion_raises():
    with pytest.raises(BudgetExceeded):
        find_monochromatic("logstar:r=1", "exptriple", 10**5,
                           budget_secs=1e-9)


# ---------------------------------------------------------------------------
# certificates

def test_certificate_json_round_trip():
    cert = find_monochromatic("logstar:r=1", "exptriple-logcond", 2**12)
    obj = json.loads(cert.to_json())
    clone = Certificate.from_json_obj(obj)
    assert clone.to_json() == cert.to_json()
    assert cert.wall_time >= 0
    assert "wall_time" not in obj


def test_verify_rejects_tampered_avoidance_count():
    cert = find_monochromatic("logstar:r=1", "exptriple-logcond", 2**12)
    assert verify_certificate(cert)
    cert.instances_checked += 1
    assert not verify_certificate(cert)


def test_verify_rejects_tampered_witness():
    cert = find_monochromatic("const:k=1", "exptriple", 16)
    assert verify_certificate(cert)
    cert.result["witness"]["colour"] = 2
    assert not verify_certificate(cert)


def test_verify_rejects_mismatched_family():
    cert = find_monochromatic("logstar:r=1", "exptriple-logcond", 2**12)
    cert.family = dict(cert.family, bound=2**13)
    assert not verify_certificate(cert)


def test_verify_recolours_witness_elements():
    # forge a counterexample containing elements of different colours
    cert = find_monochromatic("const:k=1", "exptriple", 16)
    cert.colouring = "logstar:r=1"
    assert not verify_certificate(cert)


# ---------------------------------------------------------------------------
# Ramsey numbers

def test_vdw_small_values():
    assert vdw_number(2, 3).value == 9
    assert vdw_number(1, 3).value == 3
    assert vdw_number(2, 2).value == 3


def test_vdw_witness_avoids():
    comp = vdw_number(2, 3)
    assert comp.methods_agree
    colours = comp.witness["colours"]
    assert comp.witness["n"] == 8 and len(colours) == 8
    for a in range(1, 9):
        for d in range(1, 4):
            if a + 2 * d <= 8:
                assert len({colours[a - 1], colours[a + d - 1],
                            colours[a + 2 * d - 1]}) > 1


def test_exp_ramsey_one_colour():
    comp = exp_ramsey_number(1)
    assert comp.value == 4
    assert comp.methods_agree
    # below the threshold there are no triples at all
    assert _exp_triples_upto(3) == []


def test_exp_ramsey_respects_ceiling():
    comp = exp_ramsey_number(2, n_max=100)
    assert comp.value is None and comp.exceeds_budget


def test_exp_triples_upto():
    assert _exp_triples_upto(16) == [
        (2, 2, 4), (2, 3, 8), (3, 2, 9), (2, 4, 16), (4, 2, 16)]


# ---------------------------------------------------------------------------
# grids, ordered unions, DIMACS

def test_grid_progression_search():
    assert find_monochromatic_grid(ConstColouring(1), 1, 3, 10) == ((1,), 1)
    assert find_monochromatic_grid(lambda x: x % 2, 1, 3, 10) == ((1,), 2)
    assert find_monochromatic_grid(ConstColouring(1), 2, 1, 4) == ((1, 1), 1)


def test_grid_respects_cap():
    with pytest.raises(BudgetExceeded):
        find_monochromatic_grid(ConstColouring(1), 3, 2, 1000, cap=10**6)


def test_grid_none_when_absent():
    # 3 points of a length-2 progression cannot all differ mod 2 unless d even
    f = lambda x: x % 3
    got = find_monochromatic_grid(f, 1, 2, 9)
    assert got == ((1,), 3)
    assert find_monochromatic_grid(f, 1, 2, 6) is None


def test_ordered_fu_search_shapes():
    assert ordered_fu_search(ConstColouring(1), 1, 2) == [(1,)]
    assert ordered_fu_search(ConstColouring(1), 2, 2) == [(1,), (2,)]
    blocks = ordered_fu_search(lambda m: bin(m).count("1") % 2 + 1, 2, 8)
    if blocks is not None:
        flat = [x for b in blocks for x in b]
        assert max(blocks[0]) < min(blocks[1])


def test_ordered_fu_blocks_are_monochromatic_unions():
    rng = random.Random(59)
    table = {m: rng.randint(1, 2) for m in range(1, 1 << 6)}
    f = lambda mask: table[mask]
    blocks = ordered_fu_search(f, 2, 6)
    if blocks is not None:
        masks = [sum(1 << (x - 1) for x in b) for b in blocks]
        target = f(masks[0])
        for bits in range(1, 4):
            u = 0
            if bits & 1:
                u |= masks[0]
            if bits & 2:
                u |= masks[1]
            assert f(u) == target


def test_ordered_fu_cap():
    with pytest.raises(BudgetExceeded):
        ordered_fu_search(ConstColouring(1), 2, 21)


def test_export_dimacs_golden():
    out = export_dimacs([1, 2, 4], [(1, 2, 4)], 2)
    lines = out.strip().split("\n")
    assert lines[0] == "p cnf 6 8"
    assert "-1 -3 -5 0" in lines and "-2 -4 -6 0" in lines
    # exactly-one block for the first value
    assert "1 2 0" in lines and "-1 -2 0" in lines
