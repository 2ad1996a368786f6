import json
from pathlib import Path

import pytest

from meetingflow.events import EventLogStore
from meetingflow.gateway import FIXTURE_SUBDIRS, GenAiGateway, ProviderConfig
from meetingflow.hotl import HotlConfig
from meetingflow.prompts import PromptLibrary
from meetingflow.session import SessionConfig, SessionEngine

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def prompt_library():
    return PromptLibrary(ROOT / "prompts")


def author_fixture(fixture_root: Path, request, text: str) -> Path:
    """Write a replay fixture file for ``request`` answering with ``text``."""
    path = Path(fixture_root) / FIXTURE_SUBDIRS[request.purpose_tag] / f"{request.fingerprint()}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps({"fingerprint": request.fingerprint(), "response": {"text": text}}, indent=2),
        encoding="utf-8",
    )
    return path


def scripted_gateway(tmp_path, responses):
    """A live-mode gateway whose transport pops canned responses in order."""
    queue = list(responses)
    cfg = ProviderConfig(
        mode="live",
        fixture_dir=tmp_path,
        endpoint_url="https://provider.test/chat",
        api_key_env_var="MEETINGFLOW_TEST_KEY",
    )
    return GenAiGateway(cfg, transport=lambda r, c: queue.pop(0))


def replay_gateway(fixture_root):
    return GenAiGateway(ProviderConfig(mode="replay", fixture_dir=fixture_root))


def feedable_gateway(tmp_path, queue):
    """Like scripted_gateway, but consumes the caller's own list so a test
    can push more responses after a failure."""
    cfg = ProviderConfig(
        mode="live",
        fixture_dir=tmp_path,
        endpoint_url="https://provider.test/chat",
        api_key_env_var="MEETINGFLOW_TEST_KEY",
    )
    return GenAiGateway(cfg, transport=lambda r, c: queue.pop(0))


# --- shared session content -------------------------------------------------------
#
# A deliberately small meeting: three phases, four survey features. Enough to
# exercise every stage of a session without wading through real-size plans.

MINI_INVITATION_KWARGS = dict(
    text=(
        "Hour-long session to settle the feature set for the next wireless "
        "headphone line within the launch budget."
    ),
    duration_minutes=60,
    organizer_id="amara",
    attendee_roles=("program_manager", "software_engineer"),
)


def _phase(title, minutes, directionality="iterative", encouraged=()):
    return {
        "pt": title,
        "pd": f"{title} for the session.",
        "be": list(encouraged),
        "bd": [],
        "p": "high",
        "t": minutes,
        "d": directionality,
    }


def mini_plan_response():
    return json.dumps(
        {
            "goal": "Settle the headphone feature set",
            "pi": [
                _phase("Introduction", 5, "directional", ["State the goal and the budget cap"]),
                _phase("Discussing Budget", 45, encouraged=["Weigh each feature against cost"]),
                _phase("Conclusion and Next Steps", 10, "directional", ["Assign owners"]),
            ],
            "exp": "An hour split between framing, the core tradeoff, and wrap-up.",
        }
    )


def mini_refined_response():
    return json.dumps(
        {
            "goal": "Settle the headphone feature set",
            "pi": [
                _phase("Introduction", 5, "directional", ["Recap the survey split"]),
                _phase(
                    "Discussing Noise Cancelling",
                    25,
                    encouraged=["Compare cost against battery impact"],
                ),
                _phase(
                    "Discussing Wireless Charging",
                    20,
                    encouraged=["Check case thickness constraints"],
                ),
                _phase("Conclusion and Next Steps", 10, "directional", ["Assign owners"]),
            ],
            "exp": "Rebuilt around the two most contested features.",
        }
    )


MINI_FEATURES = [
    ("Noise Cancelling", 20.0),
    ("Wireless Charging", 15.0),
    ("Water Resistance", 10.0),
    ("Spatial Audio", 25.0),
]


def mini_features_response():
    return json.dumps([{"name": n, "price": p} for n, p in MINI_FEATURES])


def layout_response_for(plan_dict_or_titles):
    """A minimal valid layout answer: Notepad everywhere, one URL up front."""
    if hasattr(plan_dict_or_titles, "phases"):
        pairs = [(p.title, p.allotted_minutes) for p in plan_dict_or_titles.phases]
    else:
        pairs = list(plan_dict_or_titles)
    entries = []
    for idx, (title, minutes) in enumerate(pairs):
        programs = [{"name": "Notepad", "description": "shared notes"}]
        if idx == 0:
            programs.append(
                {"name": "https://www.bing.com/search?q=headphone+market", "description": "background"}
            )
        entries.append({"PhaseTitle": title, "timer": minutes, "programList": programs})
    return json.dumps(entries)


def include_all_selections(tool, exclude=()):
    return {
        fid: ("exclude" if fid in exclude else "include") for fid in tool.feature_ids
    }


def mini_config(**overrides):
    defaults = dict(
        min_features=4,
        hotl=HotlConfig(
            proposal_window_seconds=10.0,
            abort_cooldown_seconds=60.0,
            abort_cooldown_utterances=5,
        ),
    )
    defaults.update(overrides)
    return SessionConfig(**defaults)


def make_engine(tmp_path, responses, config=None):
    """An engine over a feedable gateway; returns (engine, response queue)."""
    queue = list(responses)
    engine = SessionEngine(
        gateway=feedable_gateway(tmp_path / "fixtures", queue),
        library=PromptLibrary(ROOT / "prompts"),
        store=EventLogStore(tmp_path / "sessions"),
        default_config=config or mini_config(),
    )
    return engine, queue
