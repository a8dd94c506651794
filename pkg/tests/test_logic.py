import math
import random

import pytest

from instances import random_formula
from strel import logic as L
from strel.logic import (DistancePredicate, InterpretationContext, ParseError, ValidationError, check,
                         expand_derived, is_core, parse, to_text, validate)
from strel.scenarios import MANET_CHANNELS, MANET_KINDS, property_library
from strel.space import HOPS

SCHEMA = dict(zip(MANET_CHANNELS, MANET_KINDS))


def test_parse_reach_example():
    phi = parse("end_dev reach(hops)[<= 1] router")
    assert phi == L.Reach("hops", DistancePredicate("<=", 1.0), L.Atomic("end_dev"), L.Atomic("router"))


def test_parse_escape_example():
    phi = parse("escape(hops)[>= 2] !end_dev")
    assert phi == L.Escape("hops", DistancePredicate(">=", 2.0), L.Not(L.Atomic("end_dev")))


def test_parse_leaves():
    assert parse("true") == L.TrueF()
    assert parse("false") == L.Not(L.TrueF())
    assert parse("@3") == L.At(3)
    assert parse("X_B > -30.5") == L.Cmp("X_B", ">", -30.5)
    assert parse("somewhere(hops)[< infinity] p").pred.bound == math.inf


def test_precedence():
    assert parse("!a & b | c") == L.Or(L.And(L.Not(L.Atomic("a")), L.Atomic("b")), L.Atomic("c"))
    assert parse("a | b U[0, 1] c") == L.Until(L.Or(L.Atomic("a"), L.Atomic("b")), 0.0, 1.0, L.Atomic("c"))
    assert parse("F[0, 1] a & b") == L.And(L.Eventually(0.0, 1.0, L.Atomic("a")), L.Atomic("b"))


def test_ambiguous_binary_nesting_needs_brackets():
    with pytest.raises(ParseError, match="brackets"):
        parse("a U[0, 1] b reach(hops)[<= 1] c")
    assert isinstance(parse("(a U[0, 1] b) reach(hops)[<= 1] c"), L.Reach)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("p &\n  (q")
    assert (info.value.line, info.value.column) == (2, 5)
    with pytest.raises(ParseError) as info:
        parse("p U[2, 1] q")
    assert info.value.line == 1


def test_round_trip_random_asts():
    rng = random.Random(21)
    for _ in range(500):
        phi = random_formula(rng, rng.randint(1, 5), 6, ["hops", "euclid"], 9)
        text = to_text(phi)
        assert parse(text) == phi
        assert to_text(parse(text)) == text


def test_expand_derived_examples():
    d = DistancePredicate("<=", 2.0)
    p = L.Atomic("p")
    assert expand_derived(L.Somewhere("hops", d, p)) == L.Reach("hops", d, L.TrueF(), p)
    assert expand_derived(L.Everywhere("hops", d, p)) == L.Not(L.Reach("hops", d, L.TrueF(), L.Not(p)))


def test_expand_derived_is_core_and_idempotent():
    rng = random.Random(22)
    for _ in range(300):
        phi = random_formula(rng, rng.randint(1, 5), 5, ["hops"], 9)
        core = expand_derived(phi)
        assert is_core(core)
        assert not any(isinstance(n, L.DERIVED_KINDS) for n in L.walk(core))
        assert expand_derived(core) == core


def test_closure_checks():
    assert L.is_reach_closed(DistancePredicate("<=", 3.0), HOPS)
    assert L.is_reach_closed(DistancePredicate("<", math.inf), HOPS)
    assert not L.is_reach_closed(DistancePredicate(">=", 3.0), HOPS)
    assert L.is_escape_closed(DistancePredicate(">", 3.0), HOPS)
    assert not L.is_escape_closed(DistancePredicate("<=", 3.0), HOPS)


def test_validate_accepts_upper_bound_reach():
    validate(parse("p reach(hops)[<= 3] q"))


def test_validate_rejects_escape_with_upper_bound():
    with pytest.raises(ValidationError) as info:
        validate(parse("escape(hops)[<= 3] p"))
    assert info.value.kind == "closure"


def test_validate_unknown_channel():
    with pytest.raises(ValidationError) as info:
        check("X_Q > 3", schema=SCHEMA)
    assert info.value.kind == "unbound"


def test_validate_channel_kinds():
    with pytest.raises(ValidationError) as info:
        check("X_B", schema=SCHEMA)
    assert info.value.kind == "type"
    with pytest.raises(ValidationError):
        check("router > 1", schema=SCHEMA)


def test_validate_unknown_distance_and_location():
    with pytest.raises(ValidationError, match="distance"):
        check("somewhere(manhattan)[<= 1] p")
    with pytest.raises(ValidationError, match="@7"):
        validate(parse("@7"), n_locations=3)


def test_custom_atom_binding():
    ctx = InterpretationContext(atoms={"hot": lambda v: v["X_H"] > 100})
    check("hot & router", ctx, SCHEMA)


def test_property_library_parses_against_manet_schema():
    lib = property_library()
    assert lib["phi_connect"] == "end_dev reach(hops)[<= 1] (router reach(hops)[< infinity] coord)"
    assert lib["phi_target"] == "everywhere(hops)[< infinity] somewhere(hops)[< 10] X_S >= 1"
    for text in lib.values():
        check(text, schema=SCHEMA, n_locations=20)
    assert parse(lib["phi_acyclic"]) == L.Not(parse(lib["phi_cycle"]))
