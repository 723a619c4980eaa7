import math

import numpy as np
import pytest

from svpipe.errors import ConfigError, DataError
from svpipe.modelmath import (
    MarginSchedule,
    SpeakerHead,
    aam_softmax_loss,
    am_softmax_loss,
    gsp,
    head_cosines_batch,
    head_cosines_grad,
    margin_at,
    margin_loss_batch,
    mqmha,
    mqmha_batch,
    mqmha_batch_grad,
    subcenter_cosine,
)

from oracles import fd_gradient, grad_rel_err, gsp_oracle, mqmha_oracle, subcenter_oracle


def random_head(rng, n_classes=4, n_sub=3, dim=6, scale=30.0):
    w = rng.normal(size=(n_classes, n_sub, dim))
    return SpeakerHead(weights=w, scale=scale)


class TestMarginSchedule:
    def test_linear_paper_endpoints(self):
        sched = MarginSchedule(0.0, 0.2, "linear", 1000)
        assert margin_at(0, sched) == 0.0
        assert margin_at(1000, sched) == 0.2

    def test_exponential_paper_endpoints(self):
        sched = MarginSchedule(0.2, 0.5, "exponential", 777)
        assert margin_at(0, sched) == 0.2
        assert margin_at(777, sched) == 0.5

    def test_exponential_midpoint_is_geometric_mean(self):
        sched = MarginSchedule(0.2, 0.5, "exponential", 10)
        assert margin_at(5, sched) == pytest.approx(math.sqrt(0.1), abs=1e-12)

    @pytest.mark.parametrize("curve,start", [("linear", 0.0), ("exponential", 0.2)])
    def test_monotone_nondecreasing(self, curve, start):
        sched = MarginSchedule(start, 0.5, curve, 57)
        values = [margin_at(s, sched) for s in range(58)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_exponential_from_zero_rejected(self):
        with pytest.raises(ConfigError, match="invalid exponential schedule"):
            MarginSchedule(0.0, 0.5, "exponential", 10)

    def test_step_outside_schedule(self):
        with pytest.raises(ConfigError):
            margin_at(11, MarginSchedule(0.0, 0.1, "linear", 10))


class TestGsp:
    def test_identical_rows_zero_std(self):
        row = np.array([1.5, -2.0, 0.25])
        out = gsp(np.tile(row, (7, 1)))
        assert np.allclose(out[:3], row)
        assert np.allclose(out[3:], 1e-5, atol=1e-12)  # sqrt of the variance floor

    def test_hand_example(self):
        out = gsp(np.array([[0.0], [2.0]]))
        assert np.allclose(out, [1.0, 1.0])

    def test_positive_scaling_homogeneous(self):
        rng = np.random.default_rng(0)
        H = rng.normal(size=(9, 4))
        assert np.allclose(gsp(3.5 * H), 3.5 * gsp(H))

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            H = rng.normal(size=(6, 3))
            assert np.allclose(gsp(H), gsp_oracle(H), atol=1e-12)


class TestMqmha:
    def test_zero_queries_reduce_to_per_head_gsp(self):
        rng = np.random.default_rng(2)
        H = rng.normal(size=(8, 6))
        out = mqmha(H, np.zeros((2, 2, 3)))
        for q in range(2):
            for i in range(2):
                block = out[(q * 2 + i) * 6 : (q * 2 + i + 1) * 6]
                assert np.allclose(block, gsp(H[:, i * 3 : (i + 1) * 3]))

    def test_single_query_single_head_zero_equals_gsp_exactly(self):
        rng = np.random.default_rng(3)
        H = rng.normal(size=(5, 4))
        assert np.array_equal(mqmha(H, np.zeros((1, 1, 4))), gsp(H))

    def test_single_frame(self):
        rng = np.random.default_rng(4)
        H = rng.normal(size=(1, 4))
        out = mqmha(H, rng.normal(size=(1, 2, 2)))
        assert np.allclose(out[0:2], H[0, 0:2])
        assert np.allclose(out[2:4], 1e-5, atol=1e-12)
        assert np.allclose(out[4:6], H[0, 2:4])

    def test_matches_weighted_moment_oracle(self):
        rng = np.random.default_rng(5)
        H = rng.normal(size=(5, 4))
        queries = rng.normal(size=(2, 2, 2))
        assert np.allclose(mqmha(H, queries), mqmha_oracle(H, queries), atol=1e-6)

    def test_invalid_head_split(self):
        with pytest.raises(ConfigError, match="invalid head split"):
            mqmha(np.zeros((4, 5)), np.zeros((1, 2, 2)))


class TestSubcenterCosine:
    def test_single_subcenter_is_plain_cosine(self):
        rng = np.random.default_rng(6)
        head = random_head(rng, n_classes=5, n_sub=1, dim=4)
        x = rng.normal(size=4)
        got = subcenter_cosine(x, head)
        w = head.weights[:, 0, :]
        want = w @ x / (np.linalg.norm(w, axis=1) * np.linalg.norm(x))
        assert np.allclose(got, want, atol=1e-12)

    def test_parallel_subcenter_scores_one(self):
        rng = np.random.default_rng(7)
        head = random_head(rng, n_classes=3, n_sub=2, dim=4)
        x = rng.normal(size=4)
        head.weights[1, 1] = 2.0 * x
        assert subcenter_cosine(x, head)[1] == pytest.approx(1.0, abs=1e-12)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(8)
        head = random_head(rng, n_classes=3, n_sub=4, dim=5)
        x = rng.normal(size=5)
        assert np.allclose(subcenter_cosine(x, head), subcenter_oracle(x, head.weights),
                           atol=1e-12)

    def test_range_and_scale_invariance(self):
        rng = np.random.default_rng(9)
        head = random_head(rng)
        x = rng.normal(size=6)
        base = subcenter_cosine(x, head)
        assert np.all(base >= -1.0) and np.all(base <= 1.0)
        assert np.allclose(subcenter_cosine(17.3 * x, head), base, atol=1e-12)

    def test_zero_embedding_rejected(self):
        rng = np.random.default_rng(10)
        with pytest.raises(DataError, match="degenerate embedding"):
            subcenter_cosine(np.zeros(6), random_head(rng))


class TestAmSoftmax:
    def test_uniform_cosines_zero_margin_gives_log_j(self):
        loss, _ = am_softmax_loss(np.full(7, 0.3), 2, scale=1.0, margin=0.0)
        assert loss == pytest.approx(math.log(7), abs=1e-12)

    def test_target_logit_with_margin(self):
        # cos=1 at the label, s=30, m=0.2: target logit 30*(1-0.2)=24.
        cosines = np.array([1.0, 0.1, -0.4])
        loss, _ = am_softmax_loss(cosines, 0, scale=30.0, margin=0.2)
        z = np.array([24.0, 3.0, -12.0])
        want = -z[0] + math.log(np.exp(z).sum())
        assert loss == pytest.approx(want, abs=1e-9)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            cosines = rng.uniform(-0.9, 0.9, size=6)
            label = int(rng.integers(0, 6))
            _, grad = am_softmax_loss(cosines, label, scale=12.0, margin=0.15)
            num = fd_gradient(
                lambda: am_softmax_loss(cosines, label, scale=12.0, margin=0.15)[0],
                cosines,
            )
            assert grad_rel_err(grad, num) < 1e-5

    def test_margin_only_penalizes(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            cosines = rng.uniform(-1, 1, size=5)
            label = int(rng.integers(0, 5))
            with_margin, _ = am_softmax_loss(cosines, label, 10.0, 0.25)
            without, _ = am_softmax_loss(cosines, label, 10.0, 0.0)
            assert with_margin >= without - 1e-12


class TestAamSoftmax:
    def test_zero_margin_equals_am(self):
        rng = np.random.default_rng(13)
        cosines = rng.uniform(-0.9, 0.9, size=5)
        l_aam, g_aam = aam_softmax_loss(cosines, 1, 20.0, 0.0)
        l_am, g_am = am_softmax_loss(cosines, 1, 20.0, 0.0)
        assert l_aam == pytest.approx(l_am, abs=1e-12)
        assert np.allclose(g_aam, g_am, atol=1e-12)

    def test_angle_addition_hand_case(self):
        # cos(pi/3 + pi/6) = 0, so the target logit vanishes.
        cosines = np.array([math.cos(math.pi / 3), 0.2, -0.1])
        scale = 8.0
        loss, _ = aam_softmax_loss(cosines, 0, scale, math.pi / 6)
        z = np.array([0.0, scale * 0.2, scale * -0.1])
        want = -z[0] + math.log(np.exp(z).sum())
        assert loss == pytest.approx(want, abs=1e-9)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            cosines = rng.uniform(-0.85, 0.85, size=6)
            label = int(rng.integers(0, 6))
            _, grad = aam_softmax_loss(cosines, label, 15.0, 0.3)
            num = fd_gradient(
                lambda: aam_softmax_loss(cosines, label, 15.0, 0.3)[0],
                cosines,
            )
            assert grad_rel_err(grad, num) < 1e-5

    def test_fallback_region_is_linear(self):
        # Label cosine below -cos(m): derivative wrt it must be the scale
        # times the softmax residual, matching the linear fallback.
        cosines = np.array([-0.99, 0.4, 0.1])
        _, grad = aam_softmax_loss(cosines, 0, 10.0, 0.3)
        num = fd_gradient(
            lambda: aam_softmax_loss(cosines, 0, 10.0, 0.3)[0], cosines, h=1e-5
        )
        assert grad_rel_err(grad, num) < 1e-5


class TestPoolingAndHeadGradients:
    def test_mqmha_grads_vs_finite_differences(self):
        rng = np.random.default_rng(15)
        H = rng.normal(size=(2, 5, 4))
        queries = rng.normal(size=(2, 2, 2))
        gout = rng.normal(size=(2, 16))

        def value():
            out, _ = mqmha_batch(H, queries)
            return float((out * gout).sum())

        _, cache = mqmha_batch(H, queries)
        gH, gq = mqmha_batch_grad(cache, gout)
        assert grad_rel_err(gH, fd_gradient(value, H)) < 1e-6
        assert grad_rel_err(gq, fd_gradient(value, queries)) < 1e-6

    def test_head_and_loss_grads_vs_finite_differences(self):
        rng = np.random.default_rng(16)
        head = random_head(rng, n_classes=4, n_sub=2, dim=5, scale=10.0)
        x = rng.normal(size=(3, 5))
        labels = np.array([0, 2, 3])

        def value():
            cos, _ = head_cosines_batch(x, head)
            loss, _ = margin_loss_batch(cos, labels, 10.0, 0.2, "am")
            return loss

        cos, cache = head_cosines_batch(x, head)
        _, d_cos = margin_loss_batch(cos, labels, 10.0, 0.2, "am")
        g_x, g_w = head_cosines_grad(cache, d_cos)
        assert grad_rel_err(g_x, fd_gradient(value, x)) < 1e-6
        assert grad_rel_err(g_w, fd_gradient(value, head.weights)) < 1e-6
