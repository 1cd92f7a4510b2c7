import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ftlab.env import (
    CutSetEnv,
    Observation,
    RemoveEdge,
    RemoveVertex,
    RewardKind,
    RewardMode,
    Submit,
    VertexQuantEnv,
    vertex_reward,
)
from ftlab.errors import BadAction, EpisodeDone
from ftlab.formats import canonical_json, export_graph_doc
from ftlab.gen import GenConfig
from ftlab.quant import minimal_cut_sets

from helpers import and2, or3, shared_a

SYM = RewardMode(RewardKind.SYMMETRIC)
PES = RewardMode(RewardKind.PESSIMISTIC)
CFG = GenConfig(n_basic=6, n_gates=3, share_prob=0.3)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def obs_bytes(obs: Observation) -> str:
    return canonical_json(obs.to_doc())


class TestVertexReward:
    def test_exact_hit_is_one(self):
        assert vertex_reward(0.3, 0.3, SYM) == 1.0

    def test_symmetric_rel_one(self):
        assert vertex_reward(0.2, 0.1, SYM) == 0.0
        assert vertex_reward(1.0, 0.5, SYM) == 0.0

    def test_pessimistic_overshoot(self):
        assert vertex_reward(0.2, 0.1, PES) == -1.0

    def test_pessimistic_undershoot_nonnegative(self):
        assert vertex_reward(0.05, 0.1, PES) == pytest.approx(0.5)

    @given(prescribed=unit, truth=unit)
    def test_bounded(self, prescribed, truth):
        for mode in (SYM, PES):
            assert -1.0 <= vertex_reward(prescribed, truth, mode) <= 1.0

    @given(truth=unit, delta=st.floats(min_value=1e-9, max_value=1.0))
    def test_pessimistic_prefers_undershoot(self, truth, delta):
        assume(0.0 <= truth - delta and truth + delta <= 1.0)
        lo = vertex_reward(truth - delta, truth, PES)
        hi = vertex_reward(truth + delta, truth, PES)
        assert lo >= hi

    @given(truth=unit)
    def test_pessimistic_argmax_at_truth(self, truth):
        best = vertex_reward(truth, truth, PES)
        assert best == 1.0
        for other in (truth / 2, min(1.0, truth + 0.1)):
            if other != truth:
                assert vertex_reward(other, truth, PES) <= best


class TestVertexQuantEnv:
    def test_reset_masks_all_gates(self):
        env = VertexQuantEnv(shared_a())
        obs = env.observation()
        gate_probs = [
            v["prob"] for v in obs.graph["vertices"] if v["kind"][0] == 0
        ]
        assert gate_probs == [None, None, None]
        assert obs.steps_remaining == 3

    def test_first_query_is_first_topological_gate(self):
        env = VertexQuantEnv(shared_a())
        assert env.observation().query == "G1"

    def test_reset_deterministic(self):
        a = VertexQuantEnv.from_config(CFG, 5).observation()
        b = VertexQuantEnv.from_config(CFG, 5).observation()
        assert obs_bytes(a) == obs_bytes(b)

    def test_oracle_agent_earns_gate_count(self):
        env = VertexQuantEnv.from_config(CFG, 9, SYM)
        total = 0.0
        while not env.done:
            query = env.observation().query
            result = env.step(env.truth[query])
            total += result.reward
        assert total == float(len(env.queries))

    def test_reveal_after_step(self):
        env = VertexQuantEnv(shared_a())
        first = env.observation().query
        result = env.step(0.5)
        revealed = {
            v["id"]: v["prob"] for v in result.observation.graph["vertices"]
        }
        assert revealed[first] == env.truth[first]

    def test_ground_truth_only_on_final_step(self):
        env = VertexQuantEnv(shared_a())
        r1 = env.step(0.5)
        assert "ground_truth" not in r1.info
        r2 = env.step(0.5)
        r3 = env.step(0.5)
        assert r3.done
        assert set(r3.info["ground_truth"]) == {"TOP", "G1", "G2"}

    def test_step_after_done(self):
        env = VertexQuantEnv(and2())
        env.step(0.5)
        with pytest.raises(EpisodeDone):
            env.step(0.5)

    def test_bad_action(self):
        env = VertexQuantEnv(and2())
        with pytest.raises(BadAction):
            env.step(1.5)
        with pytest.raises(BadAction):
            env.step(float("nan"))

    def test_reward_sequence_deterministic(self):
        script = [0.1, 0.4, 0.9]
        runs = []
        for _ in range(2):
            env = VertexQuantEnv.from_config(CFG, 21, SYM)
            runs.append([env.step(a).reward for a in script[: len(env.queries)]])
        assert runs[0] == runs[1]


class TestCutSetEnv:
    def test_reset_shows_full_tree(self):
        tree = or3()
        env = CutSetEnv(tree)
        assert env.observation().graph == export_graph_doc(tree, mask_gate_probs=True)

    def test_initial_budget(self):
        tree = or3()
        env = CutSetEnv(tree)
        assert env.observation().steps_remaining == 4 * len(tree.vertices)

    def test_carve_singleton_from_or3(self):
        env = CutSetEnv(or3())
        assert env.step(RemoveVertex("BE2")).reward == 0.0
        assert env.step(RemoveVertex("BE3")).reward == 0.0
        result = env.step(Submit())
        assert result.reward == 2.0
        assert result.done
        assert result.info["cutset"] == ["BE1"]

    def test_remove_top_rejected(self):
        env = CutSetEnv(or3())
        before = obs_bytes(env.observation())
        result = env.step(RemoveVertex("TOP"))
        assert result.reward == -1.0
        assert result.info["valid"] is False
        assert not result.done
        assert obs_bytes(result.observation) == before

    def test_submit_non_cut_set(self):
        env = CutSetEnv(and2())
        env.step(RemoveVertex("B"))
        result = env.step(Submit())
        assert result.reward == -1.0
        assert result.done

    def test_childless_gate_rejected(self):
        env = CutSetEnv(and2())
        env.step(RemoveVertex("B"))
        before = obs_bytes(env.observation())
        result = env.step(RemoveVertex("A"))  # would leave TOP childless
        assert result.reward == -1.0
        assert obs_bytes(result.observation) == before

    def test_remove_edge(self):
        env = CutSetEnv(or3())
        result = env.step(RemoveEdge("BE2", "TOP"))
        assert result.reward == 0.0
        assert ["BE2", "TOP"] not in result.observation.graph["edges"]

    def test_unknown_reference_is_invalid_action(self):
        env = CutSetEnv(or3())
        before = obs_bytes(env.observation())
        result = env.step(RemoveVertex("NOPE"))
        assert result.reward == -1.0
        assert obs_bytes(result.observation) == before
        result = env.step(RemoveEdge("BE1", "BE2"))
        assert result.reward == -1.0

    def test_rejected_actions_do_not_consume_budget(self):
        env = CutSetEnv(or3(), max_steps=2)
        env.step(RemoveVertex("TOP"))
        env.step(RemoveVertex("TOP"))
        env.step(RemoveVertex("TOP"))
        assert env.observation().steps_remaining == 2

    def test_timeout_ends_episode_with_zero_reward(self):
        env = CutSetEnv(or3(), max_steps=1)
        result = env.step(RemoveVertex("BE2"))
        assert result.done
        assert result.reward == 0.0

    def test_step_after_done(self):
        env = CutSetEnv(or3())
        env.step(Submit())
        with pytest.raises(EpisodeDone):
            env.step(Submit())

    def test_submit_immediately_scores_full_set(self):
        env = CutSetEnv(or3())
        result = env.step(Submit())
        # every basic still connected: valid cut set of size 3, reward 0
        assert result.reward == 0.0
        assert result.info["valid"] is True

    def test_best_submission_is_smallest_mcs(self):
        tree = shared_a()
        smallest = min(len(s) for s in minimal_cut_sets(tree).sets)
        n_basics = len(tree.basic_ids())
        env = CutSetEnv(tree)
        env.step(RemoveVertex("B"))
        env.step(RemoveVertex("C"))
        result = env.step(Submit())
        assert result.reward == float(n_basics - smallest)

    def test_episode_determinism(self):
        script = [RemoveVertex("BE2"), RemoveEdge("BE3", "TOP"), Submit()]
        transcripts = []
        for _ in range(2):
            env = CutSetEnv(or3())
            out = []
            for action in script:
                r = env.step(action)
                out.append((obs_bytes(r.observation), r.reward, r.done))
            transcripts.append(out)
        assert transcripts[0] == transcripts[1]
