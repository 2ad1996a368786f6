"""Plan generation and refinement on top of the gateway.

Both operations share a shape: build a prompt, run the structured-output
loop, validate the parsed plan, and give the model one extra corrective
cycle if validation (as opposed to parsing) found errors. Only then does a
bad plan become an exception.

Refinement additionally requires real disagreement to work with: it takes
the divergence report, picks the most contested features, and asks for a
plan that dedicates one discussion phase to each of them.
"""

from __future__ import annotations

import json
from dataclasses import replace

from .errors import PlanInvalid, PreconditionViolation, StructuredOutputExhausted
from .focus import DivergenceReport, FocusTool
from .gateway import GenAiGateway, PromptRequest, correction_for
from .model import Invitation, PhasePlan, parse_compact_plan, validate_plan
from .prompts import PromptLibrary

DEFAULT_REFINEMENT_TOP_K = 2


def build_initial_request(
    library: PromptLibrary, invitation: Invitation, max_attempts: int = 3
) -> PromptRequest:
    system, user = library.render(
        "phase_generation",
        duration_minutes=invitation.duration_minutes,
        invitation=invitation.text,
    )
    return PromptRequest(
        purpose_tag="phase_generation",
        system_prompt=system,
        user_prompt=user,
        max_attempts=max_attempts,
    )


def summarize_divergence(tool: FocusTool, divergence: DivergenceReport, top_k: int) -> str:
    """Bullet list of the top contested features, with vote counts."""
    tally_by_id = {t.feature_id: t for t in divergence.tallies}
    lines = []
    for feature_id in divergence.divergent_ids_ranked[:top_k]:
        feature = tool.feature_by_id(feature_id)
        tally = tally_by_id[feature_id]
        lines.append(
            f"- {feature.name}: {tally.include_count} voted include, "
            f"{tally.exclude_count} voted exclude"
        )
    return "\n".join(lines)


def selected_features(tool: FocusTool, divergence: DivergenceReport, top_k: int):
    return [tool.feature_by_id(fid) for fid in divergence.divergent_ids_ranked[:top_k]]


def build_refinement_request(
    library: PromptLibrary,
    invitation: Invitation,
    base_plan: PhasePlan,
    tool: FocusTool,
    divergence: DivergenceReport,
    top_k: int = DEFAULT_REFINEMENT_TOP_K,
    max_attempts: int = 3,
) -> PromptRequest:
    system, user = library.render(
        "phase_refinement",
        duration_minutes=invitation.duration_minutes,
        base_plan=json.dumps(base_plan.to_compact_dict(), ensure_ascii=False),
        divergence_summary=summarize_divergence(tool, divergence, top_k),
    )
    return PromptRequest(
        purpose_tag="phase_refinement",
        system_prompt=system,
        user_prompt=user,
        max_attempts=max_attempts,
    )


def _validated_cycle(
    gateway: GenAiGateway,
    request: PromptRequest,
    invitation: Invitation,
    extra_checks=None,
) -> PhasePlan:
    """Structured completion + validation, with one corrective retry on
    validation errors. ``extra_checks(plan) -> list[str]`` adds semantic
    error messages beyond the standard validator."""
    def inspect(plan: PhasePlan):
        report = validate_plan(plan, invitation)
        problems = [v.message for v in report.errors]
        if extra_checks is not None:
            problems.extend(extra_checks(plan))
        return report, problems

    done = gateway.complete_structured(request, parse_compact_plan)
    report, problems = inspect(done.value)
    if not problems:
        return done.value

    retry = done.request.with_correction(
        correction_for("the plan violated these rules: " + "; ".join(problems))
    )
    done = gateway.complete_structured(retry, parse_compact_plan)
    report, problems = inspect(done.value)
    if problems:
        raise PlanInvalid(
            "plan failed validation after corrective retry: " + "; ".join(problems),
            report=report,
        )
    return done.value


def generate_initial_plan(
    gateway: GenAiGateway,
    library: PromptLibrary,
    invitation: Invitation,
    max_attempts: int = 3,
) -> PhasePlan:
    """Turn an invitation into a validated plan at revision 0."""
    request = build_initial_request(library, invitation, max_attempts)
    return _validated_cycle(gateway, request, invitation)


def refine_plan(
    gateway: GenAiGateway,
    library: PromptLibrary,
    invitation: Invitation,
    base_plan: PhasePlan,
    tool: FocusTool,
    divergence: DivergenceReport,
    top_k: int = DEFAULT_REFINEMENT_TOP_K,
    max_attempts: int = 3,
) -> PhasePlan:
    """Restructure the plan around the most contested features.

    Requires at least one divergent feature; the result carries the next
    revision number and must dedicate a discussion phase to every selected
    feature.
    """
    if not divergence.divergent_ids_ranked:
        raise PreconditionViolation("refinement needs at least one divergent feature")

    request = build_refinement_request(
        library, invitation, base_plan, tool, divergence, top_k, max_attempts
    )
    chosen = selected_features(tool, divergence, top_k)

    def feature_phase_checks(plan: PhasePlan) -> list[str]:
        problems = []
        for feature in chosen:
            needle = feature.name.lower()
            if not any(needle in phase.title.lower() for phase in plan.phases):
                problems.append(f"no discussion phase for contested item {feature.name!r}")
        return problems

    plan = _validated_cycle(gateway, request, invitation, extra_checks=feature_phase_checks)
    return replace(plan, revision=base_plan.revision + 1)
