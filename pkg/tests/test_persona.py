"""System prompt assembly tests."""

from __future__ import annotations

import pytest

from parley.envgraph import parse_environment
from parley.errors import ProfileNotInRosterError
from parley.persona import (
    IDENTITY_HEADER,
    MAP_HEADER,
    RULES_HEADER,
    TEAM_HEADER,
    AgentProfile,
    build_system_message,
    default_debate_guidance,
)


def test_guidance_mentions_pointing_out_mistakes():
    assert "point out mistakes" in default_debate_guidance()


def test_guidance_teaches_the_plan_grammar_and_marker():
    guidance = default_debate_guidance()
    assert "PLAN" in guidance
    assert "@supervisor" in guidance


def test_guidance_is_a_pure_constant():
    assert default_debate_guidance() == default_debate_guidance()


def test_prompt_contains_identity_map_and_guidance(roster, chain_graph):
    prompt = build_system_message(roster[0], roster, chain_graph)
    assert "Alpha" in prompt
    assert "A nimble sweeper robot." in prompt
    assert "Kitchen <-> Hall" in prompt
    assert default_debate_guidance() in prompt


def test_prompt_shows_whole_roster_and_start_rooms(roster, chain_graph):
    prompt = build_system_message(roster[0], roster, chain_graph)
    assert "Bravo" in prompt
    assert "A bin-carrier robot." in prompt
    assert "Alpha starts in Kitchen" in prompt
    assert "Bravo starts in Office" in prompt


def test_prompt_sections_come_in_order(roster, chain_graph):
    prompt = build_system_message(roster[0], roster, chain_graph)
    indices = [prompt.index(h) for h in (IDENTITY_HEADER, TEAM_HEADER, MAP_HEADER, RULES_HEADER)]
    assert indices == sorted(indices)


def test_custom_guidance_replaces_default(roster, chain_graph):
    prompt = build_system_message(roster[0], roster, chain_graph, guidance="G-XYZ")
    assert "G-XYZ" in prompt
    assert default_debate_guidance() not in prompt


def test_profile_must_be_in_roster(roster, chain_graph):
    outsider = AgentProfile("Zulu", "Not on this team.", "Hall")
    with pytest.raises(ProfileNotInRosterError):
        build_system_message(outsider, roster, chain_graph)


def test_prompts_differ_only_in_identity_section(roster, chain_graph):
    prompts = [build_system_message(p, roster, chain_graph) for p in roster]
    tails = [p[p.index(TEAM_HEADER):] for p in prompts]
    assert tails[0] == tails[1]
    heads = [p[: p.index(TEAM_HEADER)] for p in prompts]
    assert heads[0] != heads[1]


def test_prompt_embeds_rendered_flowchart_verbatim(roster):
    graph = parse_environment("room Dock\nKitchen <-> Hall\nHall <-> Office")
    agents = [
        AgentProfile("Alpha", "Sweeper.", "Kitchen"),
        AgentProfile("Bravo", "Carrier.", "Office"),
    ]
    from parley.envgraph import render_flowchart

    for profile in agents:
        prompt = build_system_message(profile, agents, graph)
        assert render_flowchart(graph) in prompt
