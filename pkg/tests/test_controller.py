import numpy as np
import pytest

from cgalr.controller import ControllerConfig, ControllerState, batch_rate, end_of_epoch
from cgalr.errors import InvalidArgument, InvalidState


def table_config(**overrides):
    base = dict(
        eta_star=0.01, epochs=20, batches_per_epoch=5,
        t0=1600.0, alpha=0.52,
        gamma_down=0.85, gamma_up=1.20, gamma_late=0.985,
        psi_min=0.65, psi_max=6.0,
        k_warm=4, n_trigger=6, cooldown=4, n_late_ratio=0.88,
    )
    base.update(overrides)
    return ControllerConfig(**base)


# Hand trace of the 20-epoch synthetic signal, worked out on paper with the
# priority order: warm-up, cooldown, sustained spike, quiet up/late. The
# expected psi values are written as the literal float products the state
# machine performs.
PSI_1 = 1.0
PSI_DOWN = 1.0 * 0.85
PSI_UP = (1.0 * 0.85) * 1.20
PSI_LATE = ((1.0 * 0.85) * 1.20) * 0.985

HAND_TRACE = [
    # (z, epsilon, expected_u, expected_psi, expected_cooldown, expected_counter)
    (5.0, 0.0, 1.0, PSI_1, 0, 0),     # epoch 1: warm-up ignores the spike
    (5.0, 0.0, 1.0, PSI_1, 0, 0),     # epoch 2
    (5.0, 0.0, 1.0, PSI_1, 0, 0),     # epoch 3
    (5.0, 0.0, 1.0, PSI_1, 0, 0),     # epoch 4: last warm-up epoch (K_warm=4)
    (2.0, 1.0, 1.0, PSI_1, 0, 1),     # epoch 5: spike, counter 1 of 6
    (2.0, 1.0, 1.0, PSI_1, 0, 2),     # epoch 6
    (2.0, 1.0, 1.0, PSI_1, 0, 3),     # epoch 7
    (2.0, 1.0, 1.0, PSI_1, 0, 4),     # epoch 8
    (2.0, 1.0, 1.0, PSI_1, 0, 5),     # epoch 9
    (2.0, 1.0, 0.85, PSI_DOWN, 4, 0),  # epoch 10: 6th consecutive -> downscale
    (2.0, 1.0, 1.0, PSI_DOWN, 3, 0),  # epoch 11: cooldown holds even on spike
    (0.0, 1.0, 1.0, PSI_DOWN, 2, 0),  # epoch 12
    (0.0, 1.0, 1.0, PSI_DOWN, 1, 0),  # epoch 13
    (0.0, 1.0, 1.0, PSI_DOWN, 0, 0),  # epoch 14: cooldown expires
    (0.0, 1.0, 1.20, PSI_UP, 4, 0),   # epoch 15: quiet, t <= N_late=17 -> upscale
    (0.0, 1.0, 1.0, PSI_UP, 3, 0),    # epoch 16: upscale also starts a cooldown
    (0.0, 1.0, 1.0, PSI_UP, 2, 0),    # epoch 17
    (0.0, 1.0, 1.0, PSI_UP, 1, 0),    # epoch 18
    (0.0, 1.0, 1.0, PSI_UP, 0, 0),    # epoch 19
    (0.0, 1.0, 0.985, PSI_LATE, 4, 0),  # epoch 20: quiet past N_late -> late decay
]


class TestBatchRate:
    def test_calibration_identity(self):
        cfg = table_config()
        state = ControllerState()
        assert batch_rate(state, cfg) == 0.01
        assert state.s == 1

    def test_multiplier_scales_envelope(self):
        cfg = table_config()
        state = ControllerState(psi=cfg.psi_max)
        eta = batch_rate(state, cfg)
        assert eta == pytest.approx(cfg.eta0 / cfg.t0**cfg.alpha * cfg.psi_max)

    def test_counter_contract_over_one_epoch(self):
        cfg = table_config(batches_per_epoch=7)
        state = ControllerState()
        for _ in range(7):
            batch_rate(state, cfg)
        assert state.s == 7

    def test_rates_decay_with_s(self):
        cfg = table_config()
        state = ControllerState()
        rates = [batch_rate(state, cfg) for _ in range(100)]
        assert all(a > b for a, b in zip(rates, rates[1:]))
        assert all(r > 0 and np.isfinite(r) for r in rates)


class TestEndOfEpoch:
    def test_hand_trace_exact(self):
        cfg = table_config()
        state = ControllerState()
        for t, (z, eps, want_u, want_psi, want_cd, want_k) in enumerate(HAND_TRACE, start=1):
            u = end_of_epoch(state, cfg, z, eps)
            assert u == want_u, f"epoch {t}: u={u}, want {want_u}"
            assert state.psi == want_psi, f"epoch {t}: psi={state.psi}, want {want_psi}"
            assert state.cooldown_left == want_cd, f"epoch {t}"
            assert state.consecutive_over == want_k, f"epoch {t}"
            assert state.epoch == t

    def test_warmup_flatness(self):
        cfg = table_config(k_warm=6, epochs=30)
        state = ControllerState()
        rng = np.random.default_rng(0)
        for _ in range(6):
            end_of_epoch(state, cfg, float(rng.normal()), float(rng.normal()))
            assert state.psi == 1.0

    def test_clip_saturation_at_psi_max(self):
        cfg = table_config(k_warm=0, cooldown=0)
        state = ControllerState(psi=cfg.psi_max)
        u = end_of_epoch(state, cfg, z=0.0, epsilon=1.0)
        assert u == cfg.gamma_up
        assert state.psi == cfg.psi_max

    def test_clip_saturation_at_psi_min(self):
        cfg = table_config(k_warm=0, cooldown=0, n_trigger=1)
        state = ControllerState(psi=cfg.psi_min)
        u = end_of_epoch(state, cfg, z=2.0, epsilon=1.0)
        assert u == cfg.gamma_down
        assert state.psi == cfg.psi_min

    def test_late_phase_boundary(self):
        cfg = table_config(k_warm=0, cooldown=0, epochs=20)  # N_late = 17
        assert cfg.n_late == 17
        state = ControllerState(epoch=16)
        assert end_of_epoch(state, cfg, 0.0, 1.0) == cfg.gamma_up  # epoch 17
        state = ControllerState(epoch=17)
        assert end_of_epoch(state, cfg, 0.0, 1.0) == cfg.gamma_late  # epoch 18

    def test_counter_resets_on_quiet_epoch(self):
        cfg = table_config(k_warm=0, cooldown=0)
        state = ControllerState()
        for _ in range(4):
            end_of_epoch(state, cfg, 2.0, 1.0)
        assert state.consecutive_over == 4
        end_of_epoch(state, cfg, 0.5, 1.0)
        assert state.consecutive_over == 0

    def test_determinism(self):
        cfg = table_config()
        rng = np.random.default_rng(5)
        zs = rng.normal(size=40)
        eps = rng.normal(size=40)
        t1, t2 = [], []
        for trace in (t1, t2):
            state = ControllerState()
            for z, e in zip(zs, eps):
                end_of_epoch(state, cfg, float(z), float(e))
                trace.append(state.psi)
        assert t1 == t2

    def test_double_call_without_batches_is_invalid(self):
        cfg = table_config()
        state = ControllerState()
        batch_rate(state, cfg)
        end_of_epoch(state, cfg, 0.0, 1.0)
        with pytest.raises(InvalidState):
            end_of_epoch(state, cfg, 0.0, 1.0)
        batch_rate(state, cfg)
        end_of_epoch(state, cfg, 0.0, 1.0)  # fine again after a batch


class TestEnvelopeInvariants:
    def test_rates_stay_inside_envelope(self):
        cfg = table_config(k_warm=1, cooldown=1, n_trigger=2, epochs=40)
        state = ControllerState()
        rng = np.random.default_rng(3)
        for _ in range(40):
            for _ in range(cfg.batches_per_epoch):
                s_before = state.s
                eta = batch_rate(state, cfg)
                lo, hi = state.envelope_bounds(cfg, s_before)
                assert lo <= eta <= hi
            end_of_epoch(state, cfg, float(rng.normal()), float(rng.normal(0.2)))
            assert cfg.psi_min <= state.psi <= cfg.psi_max

    def test_squared_rate_sum_bounded(self):
        cfg = table_config(epochs=50)
        state = ControllerState()
        rng = np.random.default_rng(9)
        total = 0.0
        for _ in range(50):
            for _ in range(cfg.batches_per_epoch):
                total += batch_rate(state, cfg) ** 2
            end_of_epoch(state, cfg, float(rng.normal()), 0.0)
        # closed comparison bound: sum (s+t0)^(-2a) <= t0^(-2a) + t0^(1-2a)/(2a-1)
        two_a = 2.0 * cfg.alpha
        bound = cfg.psi_max**2 * cfg.eta0**2 * (cfg.t0**-two_a + cfg.t0 ** (1.0 - two_a) / (two_a - 1.0))
        assert total <= bound


def test_config_validation():
    with pytest.raises(InvalidArgument):
        table_config(alpha=0.5)
    with pytest.raises(InvalidArgument):
        table_config(alpha=1.2)
    with pytest.raises(InvalidArgument):
        table_config(gamma_up=0.9)
    with pytest.raises(InvalidArgument):
        table_config(gamma_late=0.5)  # below gamma_down
    with pytest.raises(InvalidArgument):
        table_config(psi_min=0.0)
    with pytest.raises(InvalidArgument):
        table_config(t0=0.5)
    with pytest.raises(InvalidArgument):
        table_config(n_late_ratio=0.0)
    with pytest.raises(InvalidArgument):
        table_config(eta_star=-1.0)


def test_eta0_calibration():
    cfg = table_config()
    assert cfg.eta0 == pytest.approx(0.01 * 1600.0**0.52)
