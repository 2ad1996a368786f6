#!/usr/bin/env python3
"""Author the recorded model responses for scenarios/strata.scenario.

The response texts live in this file. Each one is pushed through the real
generation pipeline with a record-mode gateway whose transport just hands
the authored text back, so every fixture file lands at exactly the
fingerprint the scenario will ask for and has already survived the
package's own parsing and validation. Rerunning overwrites in place.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from meetingflow.focus import build_response, compute_divergence, generate_focus_tool
from meetingflow.gateway import GenAiGateway, PromptRequest, ProviderConfig
from meetingflow.layout import generate_phase_layouts
from meetingflow.pipeline import generate_initial_plan, refine_plan
from meetingflow.prompts import PromptLibrary
from meetingflow.scenario import ScenarioScript
from meetingflow.session import SessionConfig

INITIAL_PLAN = {
    "goal": "Lock the Strata Headphones 2 feature set within the launch budget",
    "exp": (
        "The hour opens with framing, moves through the feature areas from "
        "customer to hardware to look and feel, and closes with decisions "
        "and owners."
    ),
    "pi": [
        {
            "pt": "Introduction",
            "pd": "Setting the stage for the meeting, outlining the goal and expected outcomes",
            "be": ["State the launch budget cap", "Preview the agenda"],
            "bd": ["Diving into specific features"],
            "p": "high", "t": 5, "d": "directional",
        },
        {
            "pt": "Discussing Target User and Price Point",
            "pd": "Agree on the customer profile and the price band the feature set must fit",
            "be": ["Reference the market survey", "Anchor decisions to the budget"],
            "bd": ["Revisiting the launch date"],
            "p": "high", "t": 15, "d": "iterative",
        },
        {
            "pt": "Discussing Software Features",
            "pd": "Weigh the app and firmware capabilities against engineering cost",
            "be": ["Estimate implementation effort per feature"],
            "bd": ["Interface pixel details"],
            "p": "medium", "t": 10, "d": "iterative",
        },
        {
            "pt": "Discussing Hardware Features",
            "pd": "Weigh drivers, radios, and battery options against the budget",
            "be": ["Check part cost against the cap"],
            "bd": ["Supplier negotiations"],
            "p": "high", "t": 10, "d": "iterative",
        },
        {
            "pt": "Discussing Design Features",
            "pd": "Settle the comfort and look decisions that affect the bill of materials",
            "be": ["Compare materials by cost"],
            "bd": ["Color naming"],
            "p": "low", "t": 10, "d": "iterative",
        },
        {
            "pt": "Conclusion and Next Steps",
            "pd": "Wrap up the decisions and assign follow up owners",
            "be": ["Assign an owner per decision"],
            "bd": ["Reopening settled items"],
            "p": "high", "t": 10, "d": "directional",
        },
    ],
}

REFINED_PLAN = {
    "goal": "Lock the Strata Headphones 2 feature set within the launch budget",
    "exp": (
        "The survey split on two features, so each gets its own discussion "
        "phase sized to settle it, with time held back for wrap up."
    ),
    "pi": [
        {
            "pt": "Introduction",
            "pd": "Setting the stage for the meeting, outlining the updated goal and expected outcomes",
            "be": ["Recap the survey results"],
            "bd": ["Diving into specific features"],
            "p": "high", "t": 5, "d": "directional",
        },
        {
            "pt": "Discussing Bluetooth 5.0",
            "pd": "Evaluate whether the newer radio earns its spot in the budget",
            "be": ["Evaluate pairing range and latency improvements"],
            "bd": ["Certification timelines"],
            "p": "high", "t": 20, "d": "iterative",
        },
        {
            "pt": "Discussing Auto Pairing",
            "pd": "Decide if instant pairing out of the box is worth the added cost",
            "be": ["Walk through the first time user flow"],
            "bd": ["Firmware scheduling"],
            "p": "high", "t": 20, "d": "iterative",
        },
        {
            "pt": "Conclusion and Next Steps",
            "pd": "Wrap up decisions and assign the follow up actions",
            "be": ["Assign owners to actions"],
            "bd": ["Reopening settled items"],
            "p": "high", "t": 10, "d": "directional",
        },
    ],
}

FEATURES = [
    ("Bluetooth 5.0", 30),
    ("Auto Pairing", 25),
    ("Active Noise Cancelling", 45),
    ("Transparency Mode", 18),
    ("Wireless Charging Case", 22),
    ("USB-C Fast Charging", 12),
    ("40-Hour Battery Life", 28),
    ("Foldable Hinge Design", 9),
    ("Memory Foam Ear Cushions", 7),
    ("Adjustable EQ Presets", 6),
    ("Companion Mobile App", 24),
    ("Voice Assistant Integration", 15),
    ("Multipoint Connection", 14),
    ("Low-Latency Gaming Mode", 16),
    ("Studio Reference Tuning", 20),
    ("Water Resistance IPX4", 11),
    ("Detachable Boom Microphone", 13),
    ("Wind Noise Reduction", 8),
    ("Touch Gesture Controls", 10),
    ("Wear Detection Sensors", 9),
    ("Spatial Audio Rendering", 26),
    ("Head Tracking", 17),
    ("Lossless Audio Codec", 19),
    ("Replaceable Ear Pads", 5),
    ("Travel Hard Case", 8),
    ("In-Case Storage for Cable", 3),
    ("Quick Charge Ten Minute Boost", 10),
    ("Firmware Over-the-Air Updates", 12),
    ("Find My Headphones", 9),
    ("Shared Audio Mode", 14),
    ("Hearing Protection Limiter", 6),
    ("Ambient Sound Amplification", 21),
]

LAYOUTS = [
    {
        "PhaseTitle": "Introduction",
        "timer": 5,
        "programList": [
            {"name": "PowerPoint", "description": "Agenda and survey recap deck"},
            {"name": "Notepad", "description": "Shared running notes"},
        ],
    },
    {
        "PhaseTitle": "Discussing Bluetooth 5.0",
        "timer": 20,
        "programList": [
            {"name": "Excel", "description": "Budget sheet with the radio line item"},
            {"name": "Calculator", "description": "Quick cost deltas"},
            {"name": "Notepad", "description": "Decision notes"},
        ],
    },
    {
        "PhaseTitle": "Discussing Auto Pairing",
        "timer": 20,
        "programList": [
            {"name": "Excel", "description": "Budget sheet with the pairing line item"},
            {
                "name": "https://www.bing.com/search?q=headphone+auto+pairing+first+time+setup",
                "description": "Competitor pairing flows",
            },
            {"name": "Notepad", "description": "Decision notes"},
        ],
    },
    {
        "PhaseTitle": "Conclusion and Next Steps",
        "timer": 10,
        "programList": [
            {"name": "Whiteboard", "description": "Owner and action matrix"},
            {"name": "Notepad", "description": "Final decision list"},
        ],
    },
]

GOLDEN = {
    "phase_generation": json.dumps(INITIAL_PLAN, indent=2, ensure_ascii=False),
    "phase_refinement": json.dumps(REFINED_PLAN, indent=2, ensure_ascii=False),
    "focus_tool_generation": json.dumps(
        [{"name": n, "price": p} for n, p in FEATURES], indent=2, ensure_ascii=False
    ),
    "layout_generation": json.dumps(LAYOUTS, indent=2, ensure_ascii=False),
}


def authored_transport(request: PromptRequest, config: ProviderConfig) -> str:
    if request.corrections:
        raise RuntimeError(
            f"authored {request.purpose_tag} response failed validation: "
            f"{request.corrections[-1]}"
        )
    return GOLDEN[request.purpose_tag]


def main() -> None:
    script = ScenarioScript.load(ROOT / "scenarios" / "strata.scenario")
    invitation = script.invitation
    cfg = SessionConfig()
    gateway = GenAiGateway(
        ProviderConfig(
            mode="record",
            fixture_dir=ROOT / "fixtures",
            endpoint_url="authoring://in-process",
            api_key_env_var="MEETINGFLOW_AUTHORING",
        ),
        transport=authored_transport,
    )
    library = PromptLibrary(ROOT / "prompts")

    plan = generate_initial_plan(gateway, library, invitation)
    minutes = [p.allotted_minutes for p in plan.phases]
    assert minutes == [5, 15, 10, 10, 10, 10], minutes

    tool = generate_focus_tool(gateway, library, invitation, cfg.min_features)
    assert len(tool.features) == 32

    responses = []
    member_roles = {m.id: m.role for m in script.members}
    for pid, at in sorted(script.vote_submit_at.items(), key=lambda kv: kv[1]):
        selections = {fid: script.vote_default for fid in tool.feature_ids}
        selections.update(script.vote_overrides.get(pid, {}))
        responses.append(build_response(tool, pid, member_roles[pid], selections, at))
    divergence = compute_divergence(tool, responses)
    assert divergence.divergent_ids_ranked == ("auto-pairing", "bluetooth-5-0"), (
        divergence.divergent_ids_ranked
    )

    refined = refine_plan(
        gateway, library, invitation, plan, tool, divergence, cfg.refinement_top_k
    )
    assert [p.allotted_minutes for p in refined.phases] == [5, 20, 20, 10]
    assert refined.revision == 1

    layouts = generate_phase_layouts(gateway, library, refined, cfg.available_programs)
    assert len(layouts) == 4

    for path in sorted((ROOT / "fixtures").rglob("*.json")):
        print(path.relative_to(ROOT))


if __name__ == "__main__":
    main()
