"""Iterative estimation/detection loop."""

import numpy as np
import pytest

from afdm_sim import (
    ChannelPrior,
    PilotConfig,
    Receiver,
    apply_time_domain,
    assemble_effective_channel,
    cancel_pilots,
    daft,
    default_params,
    grid_gains,
    idaft,
    mmse_estimate,
    modulate_bits,
    mp_detect,
    run_receiver,
    sample_channel,
    superimpose,
    threshold_paths,
)


def received_frame(rng, receiver, channel, bits=None, noise_power=0.0):
    cfg = receiver.cfg
    if bits is None:
        data = np.zeros(cfg.n_subcarriers, dtype=complex)
    else:
        data = modulate_bits(bits, receiver.alphabet, receiver.data_amplitude)
    frame = superimpose(receiver.pilot_frame, data)
    r = apply_time_domain(
        idaft(frame, cfg), channel, cfg,
        noise_power=noise_power, rng=rng if noise_power > 0 else None,
    )
    return daft(r, cfg)


class TestSingleIteration:
    def test_matches_manual_pipeline(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 2, 1e4)
        receiver = Receiver(cfg, pc, data_amplitude=np.sqrt(10.0), noise_power=1.0, max_iters=1)
        rng = np.random.default_rng(0)
        ch = sample_channel(rng, 3, cfg)
        bits = rng.integers(0, 2, size=128)
        y = received_frame(rng, receiver, ch, bits=bits, noise_power=1.0)
        report = receiver.run(y)

        gains = mmse_estimate(y, receiver.response, receiver.prior, receiver.noise_var)
        mask = threshold_paths(gains, receiver.threshold)
        sparse = assemble_effective_channel(gains, mask, cfg)
        detection = mp_detect(
            cancel_pilots(y, sparse, receiver.pilot_frame),
            sparse,
            receiver.alphabet,
            receiver.detector_noise,
            scale=receiver.data_amplitude,
        )
        assert report.iterations == 1
        np.testing.assert_allclose(report.gain_estimates[0], gains, atol=1e-12)
        np.testing.assert_array_equal(report.indicators[0], mask)
        np.testing.assert_array_equal(
            report.bit_decisions[0][::2] * 2 + report.bit_decisions[0][1::2],
            detection.indices,
        )


class TestFixedPoint:
    def test_pilot_only_noise_free(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 1, 1e4)
        receiver = Receiver(cfg, pc, data_amplitude=0.0, noise_power=0.0, max_iters=3)
        rng = np.random.default_rng(1)
        ch = sample_channel(rng, 3, cfg)
        truth = grid_gains(ch, cfg)

        y = receiver.response @ truth
        report = receiver.run(y)
        np.testing.assert_array_equal(report.indicators[0], np.abs(truth) > 0)
        np.testing.assert_allclose(report.gain_estimates[0], truth, atol=1e-9)
        assert report.iterations == 2
        change = np.max(np.abs(report.gain_estimates[1] - report.gain_estimates[0]))
        assert change < 1e-8
        assert report.bit_decisions == [None, None]

    def test_pilot_only_noise_free_time_domain(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 1, 1e4)
        receiver = Receiver(cfg, pc, data_amplitude=0.0, noise_power=0.0, max_iters=3)
        rng = np.random.default_rng(2)
        ch = sample_channel(rng, 3, cfg)
        truth = grid_gains(ch, cfg)

        report = receiver.run(received_frame(rng, receiver, ch))
        support = np.abs(truth) > 0
        assert np.all(report.indicators[0][support])
        estimate = report.gain_estimates[0] * report.indicators[0]
        assert float(np.sum(np.abs(estimate - truth) ** 2)) < 1e-6
        assert report.iterations == 2
        assert np.max(np.abs(report.gain_estimates[1] - report.gain_estimates[0])) < 1e-8


class TestFullLoop:
    def test_report_shapes_and_residuals(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 2, 1e4)
        receiver = Receiver(cfg, pc, data_amplitude=np.sqrt(10.0), noise_power=1.0, max_iters=3)
        rng = np.random.default_rng(3)
        ch = sample_channel(rng, 3, cfg)
        bits = rng.integers(0, 2, size=128)
        report = receiver.run(received_frame(rng, receiver, ch, bits=bits, noise_power=1.0))

        assert 1 <= report.iterations <= 3
        assert len(report.gain_estimates) == report.iterations
        assert len(report.indicators) == report.iterations
        assert len(report.bit_decisions) == report.iterations
        assert len(report.residual_norms) == report.iterations
        for decisions in report.bit_decisions:
            assert decisions.shape == (128,)
        for norm in report.residual_norms:
            assert np.isfinite(norm)

    def test_iterations_capped(self):
        cfg = default_params(32, 1, 1)
        pc = PilotConfig.for_config(cfg, 1, 1e3)
        receiver = Receiver(cfg, pc, data_amplitude=2.0, noise_power=1.0, max_iters=5)
        rng = np.random.default_rng(4)
        ch = sample_channel(rng, 2, cfg)
        bits = rng.integers(0, 2, size=64)
        report = receiver.run(received_frame(rng, receiver, ch, bits=bits, noise_power=1.0))
        assert report.iterations <= 5

    def test_wrapper_matches_class(self):
        cfg = default_params(32, 1, 1)
        pc = PilotConfig.for_config(cfg, 1, 1e3)
        prior = ChannelPrior.uniform(cfg)
        rng = np.random.default_rng(5)
        ch = sample_channel(rng, 2, cfg)
        receiver = Receiver(
            cfg, pc, prior=prior, data_amplitude=1.0, noise_power=0.5, max_iters=2
        )
        bits = rng.integers(0, 2, size=64)
        y = received_frame(rng, receiver, ch, bits=bits, noise_power=0.5)
        direct = receiver.run(y)
        wrapped = run_receiver(
            y, pc, prior, cfg, data_amplitude=1.0, noise_power=0.5, max_iters=2
        )
        assert wrapped.iterations == direct.iterations
        for a, b in zip(wrapped.gain_estimates, direct.gain_estimates):
            np.testing.assert_array_equal(a, b)

    def test_invalid_arguments(self):
        cfg = default_params(32, 1, 1)
        pc = PilotConfig.for_config(cfg, 1, 1.0)
        with pytest.raises(ValueError, match="max_iters"):
            Receiver(cfg, pc, max_iters=0)
        with pytest.raises(ValueError, match="resynthesis"):
            Receiver(cfg, pc, resynthesis="firm")
        receiver = Receiver(cfg, pc)
        with pytest.raises(ValueError, match="length-32"):
            receiver.run(np.zeros(16))


class TestDetectorNoiseModel:
    def test_raised_only_on_pilot_rows(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 2, 1e4)
        receiver = Receiver(cfg, pc, data_amplitude=np.sqrt(10.0), noise_power=1.0)
        noise = receiver.detector_noise
        assert noise.shape == (64,)
        assert np.all(noise >= 1.0)
        footprint = np.abs(receiver.response).sum(axis=1) > 0
        assert np.all(noise[footprint] > 1.0)
        np.testing.assert_allclose(noise[~footprint], 1.0)

    def test_residual_scales_with_estimator_error(self):
        # splitting the same pilot power over more pilots spreads the
        # residual image thinner, so the per-row raise drops
        cfg = default_params(512, 2, 2)
        raises = []
        for count in (1, 4, 16):
            pc = PilotConfig.for_config(cfg, count, 1e5)
            receiver = Receiver(cfg, pc, data_amplitude=np.sqrt(10.0), noise_power=1.0)
            raises.append(receiver.detector_noise.max() - 1.0)
        assert raises[0] > raises[1] > raises[2] > 0.0


class TestResynthesisModes:
    def test_modes_share_first_iteration(self):
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 2, 1e4)
        rng = np.random.default_rng(6)
        ch = sample_channel(rng, 3, cfg)
        bits = rng.integers(0, 2, size=128)
        kwargs = dict(data_amplitude=np.sqrt(10.0), noise_power=1.0, max_iters=3)
        soft = Receiver(cfg, pc, resynthesis="soft", **kwargs)
        hard = Receiver(cfg, pc, resynthesis="hard", **kwargs)
        y = received_frame(rng, soft, ch, bits=bits, noise_power=1.0)
        soft_report = soft.run(y)
        hard_report = hard.run(y)
        np.testing.assert_array_equal(
            soft_report.gain_estimates[0], hard_report.gain_estimates[0]
        )
        np.testing.assert_array_equal(
            soft_report.bit_decisions[0], hard_report.bit_decisions[0]
        )

    def test_confident_detection_makes_modes_agree(self):
        # with pilot interference cancelled exactly and mild noise the
        # posteriors saturate, so posterior means equal hard symbols
        cfg = default_params(64, 2, 2)
        pc = PilotConfig.for_config(cfg, 2, 1e6)
        rng = np.random.default_rng(7)
        ch = sample_channel(rng, 3, cfg)
        bits = rng.integers(0, 2, size=128)
        kwargs = dict(data_amplitude=np.sqrt(100.0), noise_power=1e-3, max_iters=2)
        soft = Receiver(cfg, pc, resynthesis="soft", **kwargs)
        hard = Receiver(cfg, pc, resynthesis="hard", **kwargs)
        y = received_frame(rng, soft, ch, bits=bits, noise_power=1e-3)
        soft_report = soft.run(y)
        hard_report = hard.run(y)
        for a, b in zip(soft_report.bit_decisions, hard_report.bit_decisions):
            np.testing.assert_array_equal(a, b)
