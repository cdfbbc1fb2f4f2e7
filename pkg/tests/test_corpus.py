import pytest

from meshpilot.actions import Action, enumerate_valid_actions
from meshpilot.corpus import (
    GenerationConfig,
    generate_corpus,
    load_corpus,
    oracle_action,
    render_observation,
    save_corpus,
)
from meshpilot.errors import ConfigError, CorpusFormatError, NoCleanChannelError
from meshpilot.mesh_sim import EventKind, NetworkEvent, Position, StatusMetrics, init_mesh

from conftest import TABLE_OBSERVATION

# sha256 of the seed-7, 200-step corpus file; observed once and frozen
SEED7_DIGEST = "4d9658e27c1e9f85648d4c1f5d182acb4f2007bdc5e9362edf66c151ceb06270"


def test_render_paper_observation(table_event, mesh):
    assert render_observation(table_event, mesh) == TABLE_OBSERVATION


@pytest.mark.parametrize("event, text", [
    (NetworkEvent(EventKind.JAMMING_DETECTED, channel=36), "Jamming detected on channel 36."),
    (NetworkEvent(EventKind.POSITION_UPDATE, subject=2, position=Position(1.0, 2.0, 0.0)),
     "Position update from Node2: [1.0, 2.0, 0.0]."),
    (NetworkEvent(EventKind.INTERFERENCE_DETECTED, channel=41), "Interference detected on channel 41."),
    (NetworkEvent(EventKind.MALICIOUS_TRAFFIC, subject=3), "Malicious traffic detected from Node3."),
    (NetworkEvent(EventKind.STATUS_REPORT, subject=1, metrics=StatusMetrics(1.5, 2.0, 12.3, 0.4)),
     "Network Status from Node1: TX Throughput 1.5 Mb/s, RX Throughput 2.0 Mb/s, "
     "Latency 12.3 ms, Packet Loss 0.4%."),
    (NetworkEvent(EventKind.STATUS_REPORT), "Network Status from the network: nominal."),
])
def test_render_templates(event, text, mesh):
    assert render_observation(event, mesh) == text


def test_oracle_rules(mesh, table_event):
    assert oracle_action(table_event, mesh) == Action.update_neighbors(1)
    jam = NetworkEvent(EventKind.JAMMING_DETECTED, channel=36)
    assert oracle_action(jam, mesh) == Action.switch_channel(37)
    assert oracle_action(NetworkEvent(EventKind.STATUS_REPORT), mesh) == Action.no_action()
    assert oracle_action(NetworkEvent(EventKind.MALICIOUS_TRAFFIC, subject=3), mesh) == Action.disconnect(3)
    assert oracle_action(NetworkEvent(EventKind.JAMMING_DETECTED, channel=40), mesh) == Action.no_action()
    pos = NetworkEvent(EventKind.POSITION_UPDATE, subject=2, position=Position(0.0, 0.0, 0.0))
    assert oracle_action(pos, mesh) == Action.update_position(2)


def test_oracle_skips_jammed_channels(mesh):
    mesh.jam_reports = {37: 0, 38: 0}
    jam = NetworkEvent(EventKind.INTERFERENCE_DETECTED, channel=36)
    assert oracle_action(jam, mesh) == Action.switch_channel(39)


def test_oracle_no_clean_channel(mesh):
    mesh.jam_reports = {c: 0 for c in range(36, 47)}
    with pytest.raises(NoCleanChannelError):
        oracle_action(NetworkEvent(EventKind.JAMMING_DETECTED, channel=36), mesh)


def test_generation_is_reproducible(corpus7):
    again = generate_corpus(GenerationConfig(step_count=200), seed=7)
    assert again.to_jsonl() == corpus7.to_jsonl()
    assert corpus7.content_digest() == SEED7_DIGEST


def test_seeds_give_different_corpora(corpus7):
    other = generate_corpus(GenerationConfig(step_count=200), seed=8)
    assert other.content_digest() != corpus7.content_digest()


def test_generation_rejects_zero_steps():
    with pytest.raises(ConfigError):
        generate_corpus(GenerationConfig(step_count=0), seed=1)


def test_corpus_invariants(corpus7):
    ids = [s.id for s in corpus7.steps]
    assert len(set(ids)) == len(ids) == 200
    assert [s.step_index for s in corpus7.steps] == list(range(200))
    for s in corpus7.steps:
        assert s.observation
        assert s.reference_action in enumerate_valid_actions(s.mesh_snapshot)
        assert oracle_action(s.event, s.mesh_snapshot) == s.reference_action
        if s.reference_action.kind.value == "SwitchChannel":
            c = s.reference_action.value
            assert c not in s.mesh_snapshot.jammed_channels
            assert c != s.mesh_snapshot.shared_channel


def test_all_event_kinds_appear(corpus7):
    assert {s.event.kind for s in corpus7.steps} == set(EventKind)


@pytest.mark.parametrize("seed", range(20))
def test_small_meshes_generate(seed):
    for n in (1, 2, 4):
        c = generate_corpus(GenerationConfig(step_count=50, node_count=n), seed=seed)
        assert all(s.reference_action in s.valid_actions() for s in c.steps)


def test_round_trip(tmp_path, corpus7):
    path = tmp_path / "c.jsonl"
    save_corpus(corpus7, path)
    loaded = load_corpus(path)
    assert loaded == corpus7
    raw = path.read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw
    assert len(raw.splitlines()) == 201


def test_truncated_final_line(tmp_path, corpus7):
    path = tmp_path / "c.jsonl"
    save_corpus(corpus7, path)
    data = path.read_bytes()
    path.write_bytes(data[:-40])
    with pytest.raises(CorpusFormatError) as info:
        load_corpus(path)
    assert info.value.line == 201


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_header_only(tmp_path, corpus7):
    path = tmp_path / "c.jsonl"
    path.write_text(corpus7.to_jsonl().split("\n")[0] + "\n")
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_missing_line_detected(tmp_path, corpus7):
    lines = corpus7.to_jsonl().split("\n")
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(lines[:50] + lines[51:]))
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_bad_reference_rejected(tmp_path, corpus7):
    lines = corpus7.to_jsonl().split("\n")
    lines[3] = lines[3].replace(corpus7.steps[2].reference_text, "Reboot everything")
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(lines))
    with pytest.raises(CorpusFormatError) as info:
        load_corpus(path)
    assert info.value.line == 4
