import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftlab.core import validate
from ftlab.errors import InfeasibleConfig
from ftlab.formats import serialize_ftdsl
from ftlab.gen import GenConfig, SplitMix64, generate
from ftlab.quant import prob_bottom_up

BASE = GenConfig(n_basic=6, n_gates=3)


class TestSplitMix64:
    def test_known_sequence(self):
        # splitmix64 reference outputs for seed 1234567
        rng = SplitMix64(1234567)
        got = [rng.next_u64() for _ in range(3)]
        assert got == [6457827717110365317, 3203168211198807973, 9817491932198370423]

    def test_below_in_range(self):
        rng = SplitMix64(42)
        assert all(0 <= rng.below(7) < 7 for _ in range(1000))

    def test_uniform_in_range(self):
        rng = SplitMix64(42)
        assert all(0.25 <= rng.uniform(0.25, 0.75) <= 0.75 for _ in range(1000))


class TestGenerate:
    def test_determinism_byte_identical(self):
        a = serialize_ftdsl(generate(BASE, 7))
        b = serialize_ftdsl(generate(BASE, 7))
        assert a == b

    def test_exact_counts_and_validity(self):
        cfg = GenConfig(n_basic=5, n_gates=3)
        t = generate(cfg, 11)
        assert validate(t).ok
        assert len(t.basic_ids()) == 5
        assert len(t.gate_ids()) == 3

    def test_no_sharing_means_proper_tree(self):
        cfg = GenConfig(n_basic=8, n_gates=4, share_prob=0.0)
        for seed in range(20):
            t = generate(cfg, seed)
            assert all(c <= 1 for c in t.parent_counts().values())
            prob_bottom_up(t)  # must not raise SharedSubtree

    def test_sharing_produces_dags(self):
        cfg = GenConfig(n_basic=10, n_gates=4, share_prob=1.0)
        t = generate(cfg, 3)
        assert any(c > 1 for c in t.parent_counts().values())
        assert validate(t).ok

    @settings(max_examples=80, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**64 - 1),
        n_basic=st.integers(min_value=2, max_value=12),
        n_gates=st.integers(min_value=1, max_value=6),
        max_children=st.integers(min_value=2, max_value=6),
        share=st.sampled_from([0.0, 0.3, 1.0]),
    )
    def test_valid_or_infeasible(self, seed, n_basic, n_gates, max_children, share):
        cfg = GenConfig(
            n_basic=n_basic,
            n_gates=n_gates,
            max_children=max_children,
            share_prob=share,
        )
        try:
            t = generate(cfg, seed)
        except InfeasibleConfig:
            # infeasibility must be seed-independent
            with pytest.raises(InfeasibleConfig):
                generate(cfg, seed + 1)
            return
        report = validate(t)
        assert report.ok, report.violations

    def test_feasibility_is_seed_independent(self):
        cfg = GenConfig(n_basic=2, n_gates=5, max_children=3)
        for seed in range(200):
            assert validate(generate(cfg, seed)).ok

    def test_kofn_only_needs_enough_basics(self):
        bad = GenConfig(n_basic=3, n_gates=4, gate_weights=(0.0, 0.0, 1.0))
        with pytest.raises(InfeasibleConfig):
            generate(bad, 1)
        ok = GenConfig(n_basic=6, n_gates=4, gate_weights=(0.0, 0.0, 1.0))
        for seed in range(50):
            t = generate(ok, seed)
            assert validate(t).ok
            assert all(
                len(t.children_of(g)) >= 2 for g in t.gate_ids()
            )

    def test_capacity_infeasible(self):
        with pytest.raises(InfeasibleConfig):
            generate(GenConfig(n_basic=10, n_gates=1, max_children=4), 0)

    def test_invalid_config_fields(self):
        with pytest.raises(InfeasibleConfig):
            generate(GenConfig(n_basic=1, n_gates=1), 0)
        with pytest.raises(InfeasibleConfig):
            generate(GenConfig(n_basic=4, n_gates=2, gate_weights=(0.0, 0.0, 0.0)), 0)
        with pytest.raises(InfeasibleConfig):
            generate(GenConfig(n_basic=4, n_gates=2, p_range=(0.5, 0.1)), 0)

    def test_probabilities_within_range(self):
        cfg = GenConfig(n_basic=10, n_gates=3, p_range=(0.2, 0.4))
        t = generate(cfg, 9)
        for b in t.basic_ids():
            assert 0.2 <= t.vertices[b].prob <= 0.4

    def test_distinct_seeds_distinct_trees(self):
        cfg = GenConfig(n_basic=5, n_gates=3)
        seen = {serialize_ftdsl(generate(cfg, seed)) for seed in range(1000)}
        assert len(seen) >= 990

    def test_rng_recorded_in_label(self):
        t = generate(BASE, 7)
        assert "splitmix64" in (t.vertices["TOP"].label or "")
