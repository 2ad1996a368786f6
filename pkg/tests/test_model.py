import json

import pytest
from hypothesis import given, strategies as st

from meetingflow.errors import InvariantViolation, ParseFailure
from meetingflow.model import (
    Invitation,
    Phase,
    PhasePlan,
    ensure_known_roles,
    parse_compact_plan,
    validate_plan,
)


def phase(title, minutes, directionality="iterative", priority="medium", description=""):
    return Phase(
        title=title,
        description=description or f"{title} segment",
        encouraged=("stay on topic",),
        discouraged=("side chatter",),
        priority=priority,
        allotted_minutes=minutes,
        directionality=directionality,
    )


def sixty_minute_invitation():
    return Invitation(
        text="Team, let's spend an hour picking the feature set for the next release.",
        duration_minutes=60,
        organizer_id="amara",
        attendee_roles=("program_manager", "software_engineer"),
    )


def full_hour_plan():
    # 5 + 15 + 10 + 10 + 10 + 10 = 60
    return PhasePlan(
        goal="Pick the feature set",
        explanation="The invitation asks for a one hour feature decision",
        phases=(
            phase("Introduction", 5, "directional", "high"),
            phase("Discussing Target User and Price Point", 15),
            phase("Discussing Software Features", 10),
            phase("Discussing Hardware Features", 10),
            phase("Discussing Design Features", 10),
            phase("Conclusion and Next Steps", 10, "directional", "high"),
        ),
    )


# --- invitation invariants ---------------------------------------------------

def test_invitation_rejects_empty_text():
    with pytest.raises(InvariantViolation):
        Invitation(text="   ", duration_minutes=30, organizer_id="a")


def test_invitation_rejects_short_duration():
    with pytest.raises(InvariantViolation):
        Invitation(text="quick sync", duration_minutes=4, organizer_id="a")


def test_invitation_rejects_non_integer_duration():
    with pytest.raises(InvariantViolation):
        Invitation(text="sync", duration_minutes=30.0, organizer_id="a")


def test_invitation_rejects_missing_organizer():
    with pytest.raises(InvariantViolation):
        Invitation(text="sync", duration_minutes=30, organizer_id=" ")


def test_invitation_five_minutes_is_allowed():
    inv = Invitation(text="standup", duration_minutes=5, organizer_id="a")
    assert inv.duration_minutes == 5


def test_role_set_check():
    ensure_known_roles(("designer", "researcher"))
    with pytest.raises(InvariantViolation):
        ensure_known_roles(("designer", "ceo"))
    ensure_known_roles(("ceo",), known=("ceo", "cfo"))


# --- phase invariants --------------------------------------------------------

def test_phase_rejects_blank_title():
    with pytest.raises(InvariantViolation):
        phase("   ", 5)


def test_phase_rejects_zero_minutes():
    with pytest.raises(InvariantViolation):
        phase("Wrap up", 0)


def test_phase_rejects_bool_minutes():
    with pytest.raises(InvariantViolation):
        phase("Wrap up", True)


def test_phase_directional_flag():
    assert phase("Intro", 5, "directional").is_directional
    assert not phase("Middle", 5, "iterative").is_directional
    assert not phase("Odd", 5, "sideways").is_directional


# --- validate_plan -----------------------------------------------------------

def test_validate_full_hour_plan_is_clean():
    report = validate_plan(full_hour_plan(), sixty_minute_invitation())
    assert report.ok
    assert report.violations == ()


def test_validate_under_allocation_is_exactly_one_warning():
    # 5 + 20 + 20 + 10 = 55 of 60
    plan = PhasePlan(
        goal="Settle the two contested features",
        explanation="Responses disagreed on two features",
        phases=(
            phase("Introduction", 5, "directional", "high"),
            phase("Discussing Bluetooth 5.0", 20),
            phase("Discussing Auto Pairing", 20),
            phase("Conclusion and Next Steps", 10, "directional", "high"),
        ),
        revision=1,
    )
    report = validate_plan(plan, sixty_minute_invitation())
    assert report.errors == ()
    assert len(report.warnings) == 1
    assert report.warnings[0].code == "under_allocated"


def test_validate_over_allocation_is_error():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(phase("Introduction", 5), phase("Deep Dive", 56)),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    assert any(v.code == "over_allocated" for v in report.errors)


def test_validate_requires_introduction_first():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(phase("Kickoff", 5), phase("Introduction", 5)),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    assert any(v.code == "missing_introduction" for v in report.errors)


def test_validate_introduction_match_is_case_insensitive():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(phase("INTRODUCTION and welcome", 5), phase("Conclusion", 5)),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    assert not any(v.code == "missing_introduction" for v in report.violations)


def test_validate_empty_phases_is_error():
    report = validate_plan(PhasePlan(goal="g", explanation="e", phases=()), sixty_minute_invitation())
    assert [v.code for v in report.errors] == ["empty_phases"]


def test_validate_flags_unknown_enum_values():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(
            phase("Introduction", 30, priority="urgent"),
            phase("Conclusion", 30, directionality="backwards"),
        ),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    codes = sorted(v.code for v in report.errors)
    assert codes == ["invalid_directionality", "invalid_priority"]


def test_validate_missing_conclusion_is_warning_only():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(phase("Introduction", 30), phase("Working Session", 30)),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    assert report.errors == ()
    assert [v.code for v in report.warnings] == ["missing_conclusion"]


def test_validate_reports_everything_without_raising():
    plan = PhasePlan(
        goal="g",
        explanation="e",
        phases=(phase("Brainstorm", 70, directionality="loop", priority="urgent"),),
    )
    report = validate_plan(plan, sixty_minute_invitation())
    codes = {v.code for v in report.violations}
    assert {
        "missing_introduction",
        "over_allocated",
        "invalid_priority",
        "invalid_directionality",
        "missing_conclusion",
    } <= codes


# --- parse_compact_plan ------------------------------------------------------

COMPACT = {
    "goal": "Pick the feature set",
    "pi": [
        {
            "pt": "Introduction",
            "pd": "Setting the stage",
            "be": ["welcome people"],
            "bd": ["rushing"],
            "p": "high",
            "t": 5,
            "d": "directional",
        },
        {
            "pt": "Conclusion and Next Steps",
            "pd": "Summarize and assign",
            "be": [],
            "bd": [],
            "p": "high",
            "t": 10,
            "d": "directional",
        },
    ],
    "exp": "The invitation asks for a decision",
}


def test_parse_plain_json():
    plan = parse_compact_plan(json.dumps(COMPACT))
    assert plan.revision == 0
    assert [p.title for p in plan.phases] == ["Introduction", "Conclusion and Next Steps"]
    assert plan.phases[0].allotted_minutes == 5
    assert plan.goal == "Pick the feature set"
    assert plan.explanation == "The invitation asks for a decision"


def test_parse_tolerates_prose_and_fences():
    text = "Sure! Here is the plan you asked for:\n```json\n" + json.dumps(COMPACT) + "\n```\nLet me know."
    plan = parse_compact_plan(text)
    assert len(plan.phases) == 2


def test_parse_skips_bracket_noise_before_payload():
    text = "[note] brackets { in prose } do not count... " + json.dumps(COMPACT)
    plan = parse_compact_plan(text)
    assert plan.goal == "Pick the feature set"


def test_parse_missing_top_level_key_names_it():
    broken = {k: v for k, v in COMPACT.items() if k != "exp"}
    with pytest.raises(ParseFailure) as err:
        parse_compact_plan(json.dumps(broken))
    assert '"exp"' in str(err.value)


def test_parse_missing_phase_key_names_it():
    broken = json.loads(json.dumps(COMPACT))
    del broken["pi"][1]["t"]
    with pytest.raises(ParseFailure) as err:
        parse_compact_plan(json.dumps(broken))
    assert '"t"' in str(err.value)
    assert "phase 1" in str(err.value)


def test_parse_ignores_unknown_keys():
    extended = json.loads(json.dumps(COMPACT))
    extended["style"] = "casual"
    extended["pi"][0]["icon"] = "wave"
    plan = parse_compact_plan(json.dumps(extended))
    assert plan.phases[0].title == "Introduction"


def test_parse_coerces_float_minutes():
    fuzzy = json.loads(json.dumps(COMPACT))
    fuzzy["pi"][0]["t"] = 5.0
    plan = parse_compact_plan(json.dumps(fuzzy))
    assert plan.phases[0].allotted_minutes == 5
    assert isinstance(plan.phases[0].allotted_minutes, int)


def test_parse_rejects_no_json():
    with pytest.raises(ParseFailure):
        parse_compact_plan("I could not produce a plan, sorry.")


def test_parse_rejects_array_top_level():
    with pytest.raises(ParseFailure):
        parse_compact_plan(json.dumps([COMPACT]))


def test_parse_rejects_blank_phase_title():
    broken = json.loads(json.dumps(COMPACT))
    broken["pi"][0]["pt"] = "  "
    with pytest.raises(ParseFailure):
        parse_compact_plan(json.dumps(broken))


def test_parse_rejects_non_string_behavior_items():
    broken = json.loads(json.dumps(COMPACT))
    broken["pi"][0]["be"] = ["ok", 3]
    with pytest.raises(ParseFailure):
        parse_compact_plan(json.dumps(broken))


# --- serialization round trips ----------------------------------------------

def test_full_dict_round_trip():
    plan = full_hour_plan()
    assert PhasePlan.from_dict(plan.to_dict()) == plan


def test_compact_round_trip_through_parser():
    plan = full_hour_plan()
    parsed = parse_compact_plan(json.dumps(plan.to_compact_dict()))
    assert parsed == plan


def test_canonical_bytes_are_stable():
    a = full_hour_plan().canonical_bytes()
    b = full_hour_plan().canonical_bytes()
    assert a == b
    assert json.loads(a.decode("utf-8"))["phases"][0]["title"] == "Introduction"


TITLES = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"), whitelist_characters=" "),
    min_size=1,
    max_size=40,
).filter(lambda s: s.strip())

PHASES = st.builds(
    Phase,
    title=TITLES,
    description=st.text(max_size=60),
    encouraged=st.lists(st.text(min_size=1, max_size=20), max_size=3).map(tuple),
    discouraged=st.lists(st.text(min_size=1, max_size=20), max_size=3).map(tuple),
    priority=st.sampled_from(["high", "medium", "low"]),
    allotted_minutes=st.integers(min_value=1, max_value=90),
    directionality=st.sampled_from(["directional", "iterative"]),
)

PLANS = st.builds(
    PhasePlan,
    goal=st.text(min_size=1, max_size=80),
    explanation=st.text(max_size=80),
    phases=st.lists(PHASES, min_size=1, max_size=6).map(tuple),
    revision=st.integers(min_value=0, max_value=5),
)


@given(PLANS)
def test_property_full_round_trip(plan):
    assert PhasePlan.from_dict(json.loads(json.dumps(plan.to_dict()))) == plan


@given(PLANS)
def test_property_compact_round_trip_drops_revision(plan):
    parsed = parse_compact_plan(json.dumps(plan.to_compact_dict()))
    assert parsed.revision == 0
    assert parsed.phases == plan.phases
    assert parsed.goal == plan.goal
    assert parsed.explanation == plan.explanation
