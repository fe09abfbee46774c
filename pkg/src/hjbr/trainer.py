"""Pretraining, the actor-critic training loop, the admissibility gate and evaluation."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from hjbr.actor import ActorNet, actor_error, actor_forward, actor_update, apply_control, clamp_control
from hjbr.config import TrainConfig
from hjbr.critic import CriticNet, bellman_residual, critic_forward, critic_update
from hjbr.data import LabeledSeriesDataset, encode_dataset, make_reference
from hjbr.features import IdentityFeatures, make_features
from hjbr.hjb import CostConfig, hjb_residual, riccati_scalar
from hjbr.reservoir import (
    DivergenceError,
    ReservoirModel,
    decode,
    make_reservoir,
    pretrain_decoder,
    run_series,
    step,
)
from hjbr.tracking import PESchedule, build_affine_eval, pe_noise

log = logging.getLogger(__name__)

STEP_COLUMNS = ("step", "epoch", "series", "t_index", "e_sq", "e_c", "norm_ea", "norm_u", "H")
EPOCH_COLUMNS = ("epoch", "sum_e_sq", "train_accuracy", "delta_wc", "delta_wa")


class GateError(RuntimeError):
    def __init__(self, report: "GateReport"):
        super().__init__("hyper-parameter gate failed: " + "; ".join(report.violations))
        self.report = report


# --------------------------------------------------------------------------- gate


@dataclass
class Calibration:
    """Extrema gathered during a no-learning pass with exploration noise.

    ``sigma_c_min`` is the smallest Frobenius norm of sigma_c = e_dot z_c'
    seen in the pass.  ``pe_level`` is the square root of the smallest
    eigenvalue of the time-averaged vec(sigma_c) vec(sigma_c)'; it is reported
    but not used by the gate.
    """

    sigma_c_min: float
    g_bar: float
    z_c_bar: float
    pe_level: float = 0.0
    samples: int = 0


class _CalibrationAccumulator:
    def __init__(self):
        self.M = None
        self.count = 0
        self.g_bar = 0.0
        self.z_bar = 0.0
        self.sig_min = math.inf

    def add(self, z_c, e_dot, g_mat):
        s = np.kron(e_dot, z_c)
        self.M = np.outer(s, s) if self.M is None else self.M + np.outer(s, s)
        self.count += 1
        self.g_bar = max(self.g_bar, float(np.linalg.norm(g_mat, 2)))
        self.z_bar = max(self.z_bar, float(np.linalg.norm(z_c)))
        self.sig_min = min(self.sig_min, float(np.linalg.norm(s)))

    def result(self) -> Calibration:
        if not self.count:
            raise ValueError("calibration saw no samples")
        lam = float(np.linalg.eigvalsh(self.M / self.count)[0])
        return Calibration(self.sig_min, self.g_bar, self.z_bar, math.sqrt(max(lam, 0.0)), self.count)


@dataclass
class GateReport:
    sigma_c_min: float
    g_bar: float
    z_c_bar: float
    inv_R_norm: float
    alpha_c_bound: float
    checks: dict  # name -> passed
    violations: list = field(default_factory=list)
    overridden: bool = False
    pe_level: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "overridden": self.overridden,
            "sigma_c_min": self.sigma_c_min,
            "g_bar": self.g_bar,
            "z_c_bar": self.z_c_bar,
            "inv_R_norm": self.inv_R_norm,
            "alpha_c_bound": self.alpha_c_bound,
            "pe_level": self.pe_level,
            "checks": dict(self.checks),
            "violations": list(self.violations),
        }


def validate_hyperparams(eta: float, alpha_c: float, alpha_a: float, cost: CostConfig, cal: Calibration) -> GateReport:
    """Check the admissibility inequalities against calibrated bounds.

    critic_rate: 0 < alpha_c < 4 alpha_a sigma_c^2 / (|R^-1|^2 g^2 z_c^2)
    actor_rate:  0 < alpha_a
    cost_weight: eta > 1
    excitation:  calibrated sigma_c_min > 0
    """
    inv_R_norm = float(np.linalg.norm(cost.R_inv, 2))
    denom = inv_R_norm**2 * cal.g_bar**2 * cal.z_c_bar**2
    bound = math.inf if denom == 0 else 4.0 * alpha_a * cal.sigma_c_min**2 / denom
    checks, violations = {}, []

    checks["excitation"] = cal.sigma_c_min > 0
    if not checks["excitation"]:
        violations.append("excitation: calibrated sigma_c_min = 0, probing noise does not excite the critic")
    checks["critic_rate"] = 0 < alpha_c < bound
    if not checks["critic_rate"]:
        violations.append(f"critic_rate: need 0 < alpha_c < {bound:.6g}, got alpha_c = {alpha_c:.6g}")
    checks["actor_rate"] = alpha_a > 0
    if not checks["actor_rate"]:
        violations.append(f"actor_rate: need alpha_a > 0, got alpha_a = {alpha_a:.6g}")
    checks["cost_weight"] = eta > 1
    if not checks["cost_weight"]:
        violations.append(f"cost_weight: need eta > 1, got eta = {eta:.6g}")
    return GateReport(cal.sigma_c_min, cal.g_bar, cal.z_c_bar, inv_R_norm, bound, checks, violations, pe_level=cal.pe_level)


# --------------------------------------------------------------------------- ADP step


@dataclass
class StepResult:
    critic: CriticNet
    actor: ActorNet
    u: np.ndarray
    e_dot: np.ndarray
    e_c: float
    e_a: np.ndarray
    z_c: np.ndarray
    H: float


def adp_step(e, f_val, g_mat, critic, actor, cost, dt, noise, u_max=math.inf, learn=True) -> StepResult:
    """One synchronous actor-critic step on the affine error system de/dt = f + g u.

    Order: the actor acts (with exploration noise, clamped), the critic learns
    from the resulting Bellman residual, then the actor moves toward the
    control implied by the updated critic.
    """
    z_c, _ = critic_forward(critic, e, dt)
    z_a, u_hat = actor_forward(actor, e, dt)
    u = clamp_control(u_hat + noise, u_max)
    e_dot = f_val + g_mat @ u
    e_c = bellman_residual(e, u, z_c, critic.Wc, e_dot, cost)
    if learn:
        critic = critic_update(critic, z_c, e_dot, e_c, dt)
    e_a = actor_error(u_hat, z_c, critic.Wc, g_mat, cost)
    if learn:
        actor = actor_update(actor, z_a, e_a, dt)
    H = hjb_residual(e, critic.Wc @ z_c, f_val, g_mat, cost)
    return StepResult(critic, actor, u, e_dot, e_c, e_a, z_c, H)


# --------------------------------------------------------------------------- pipeline


def build_model(cfg: TrainConfig, n_in: int, c: int) -> ReservoirModel:
    return make_reservoir(
        n_in,
        cfg.n_r,
        c,
        cfg.n_plastic,
        seed=cfg.seed_reservoir,
        spectral_radius=cfg.spectral_radius,
        input_scale=cfg.input_scale,
        alpha1=cfg.alpha1,
        phi=cfg.phi,
        plastic_mode=cfg.plastic_mode,
    )


def build_critic(cfg: TrainConfig, c: int) -> CriticNet:
    feats = make_features(cfg.feature_kind, c, cfg.n_c, cfg.seed_critic, cfg.feature_leak, cfg.feature_scale)
    return CriticNet.zeros(feats, c, cfg.alpha_c)


def build_actor(cfg: TrainConfig, c: int) -> ActorNet:
    feats = make_features(cfg.feature_kind, c, cfg.n_a, cfg.seed_actor, cfg.feature_leak, cfg.feature_scale)
    return ActorNet.zeros(feats, cfg.n_plastic, cfg.alpha_a)


def prepare_data(cfg: TrainConfig, dataset: LabeledSeriesDataset) -> LabeledSeriesDataset:
    return encode_dataset(dataset, cfg.encoding, cfg.seed_data, cfg.encoding_k or None)


def pretrain(cfg: TrainConfig, dataset: LabeledSeriesDataset) -> ReservoirModel:
    """Build the reservoir from config and fit its decoder on ``dataset``."""
    data = prepare_data(cfg, dataset)
    model = build_model(cfg, data.n_in, data.c)
    return model.with_decoder(pretrain_decoder(data, model, cfg.ridge_lambda, cfg.dt))


@dataclass
class RunDiagnostics:
    steps: np.ndarray  # structured, STEP_COLUMNS
    epochs: np.ndarray  # structured, EPOCH_COLUMNS
    gate: GateReport | None = None
    wall_clock: float = 0.0

    def write_steps_csv(self, path) -> None:
        _write_csv(path, self.steps, STEP_COLUMNS)

    def write_epochs_csv(self, path) -> None:
        _write_csv(path, self.epochs, EPOCH_COLUMNS)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path, arr, cols) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in arr:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")


_STEP_DTYPE = np.dtype(
    [("step", "i8"), ("epoch", "i8"), ("series", "i8"), ("t_index", "i8")]
    + [(c, "f8") for c in STEP_COLUMNS[4:]]
)
_EPOCH_DTYPE = np.dtype([("epoch", "i8")] + [(c, "f8") for c in EPOCH_COLUMNS[1:]])


def _noise_seed(cfg: TrainConfig, calibration: bool) -> int:
    # calibration draws from its own stream so training noise is unaffected by it
    return cfg.seed_noise * 2 + (1 if calibration else 0)


def _epoch_pass(model, data, critic, actor, cfg, cost, epoch, step0, learn, sink=None, acc=None):
    """Run every series once through the closed loop.  Returns updated state."""
    dt, u_max, n = cfg.dt, cfg.u_limit, model.n_plastic
    schedule = cfg.pe_schedule
    seed = _noise_seed(cfg, acc is not None)
    k = step0
    u_sum = np.zeros(n)
    correct = 0
    sum_e_sq = 0.0
    for si, s in enumerate(data.series):
        state = model.zero_state()
        critic.features.reset()
        actor.features.reset()
        refs = make_reference(s.label, len(s.values), data.c)
        y_sum = np.zeros(data.c)
        for t, x in enumerate(s.values):
            state = step(state, x, model, dt, k)
            ev = build_affine_eval(model, state, refs[t], x)
            noise = pe_noise(n, schedule, k, seed, epoch)
            g_mat = ev.g_mat
            if cfg.pe_on_g and schedule.amplitude(epoch) > 0:
                g_mat = g_mat + pe_noise(g_mat.size, schedule, k, seed + 1, epoch).reshape(g_mat.shape)
            res = adp_step(ev.e, ev.f_val, g_mat, critic, actor, cost, dt, noise, u_max, learn)
            critic, actor = res.critic, res.actor
            model = apply_control(model, res.u)
            u_sum += res.u
            e_sq = float(ev.e @ ev.e)
            sum_e_sq += e_sq
            y_sum += ev.e + refs[t]
            if acc is not None:
                acc.add(res.z_c, res.e_dot, g_mat)
            if sink is not None:
                norm_u = float(np.max(np.abs(res.u)))
                rec = (k, epoch, si, t, e_sq, res.e_c, float(np.linalg.norm(res.e_a)), norm_u, res.H)
                sink.append(rec)
                _guard(cfg, k, state, critic, actor, sink)
            k += 1
        correct += int(np.argmax(y_sum) == s.label)
    return model, critic, actor, k, sum_e_sq, correct / len(data), u_sum


def _guard(cfg, k, state, critic, actor, sink):
    norms = (
        math.sqrt(state.v @ state.v),
        math.sqrt(np.vdot(critic.Wc, critic.Wc)),
        math.sqrt(np.vdot(actor.Wa, actor.Wa)),
        abs(sink[-1][5]),
    )
    if not all(map(math.isfinite, norms)) or max(norms) > cfg.guard_norm:
        window = np.array(sink[-50:], dtype=_STEP_DTYPE)
        raise DivergenceError(f"training diverged at step {k} (norms {max(norms):.3g})", k, window)


def calibrate(model, data, critic, actor, cfg: TrainConfig, cost: CostConfig) -> Calibration:
    """One no-learning epoch with exploration noise, collecting the gate bounds."""
    acc = _CalibrationAccumulator()
    _epoch_pass(model, data, critic, actor, cfg, cost, 0, 0, learn=False, acc=acc)
    return acc.result()


def gate_for(cfg: TrainConfig, model, data, critic=None, actor=None) -> GateReport:
    critic = critic or build_critic(cfg, data.c)
    actor = actor or build_actor(cfg, data.c)
    cost = cfg.cost()
    cal = calibrate(model, data, critic, actor, cfg, cost)
    return validate_hyperparams(cfg.eta, cfg.alpha_c, cfg.alpha_a, cost, cal)


def train(dataset, model: ReservoirModel, cfg: TrainConfig, critic=None, actor=None, force=False):
    """Actor-critic training of the plastic recurrent weights.

    Returns ``(trained_model, RunDiagnostics, critic, actor)``.  The trained
    model's plastic entries are the consolidated control: the mean applied u
    over the final epoch (``consolidate='mean'``) or the last applied u.
    """
    t0 = time.perf_counter()
    data = prepare_data(cfg, dataset)
    if len(data) == 0:
        raise ValueError("dataset is empty")
    critic = critic or build_critic(cfg, data.c)
    actor = actor or build_actor(cfg, data.c)
    n_l = max(len(s.values) for s in data.series)
    cost = cfg.cost(t_f=n_l * cfg.dt)

    cal = calibrate(model, data, critic, actor, cfg, cost)
    gate = validate_hyperparams(cfg.eta, cfg.alpha_c, cfg.alpha_a, cost, cal)
    if not gate.passed:
        if not force:
            raise GateError(gate)
        gate.overridden = True
        log.warning("gate failed but overridden: %s", "; ".join(gate.violations))

    sink: list = []
    epochs = []
    k = 0
    u_mean = model.plastic_values()
    for ep in range(cfg.epochs):
        Wc0, Wa0 = critic.Wc, actor.Wa
        n0 = k
        model, critic, actor, k, sum_e_sq, acc, u_sum = _epoch_pass(
            model, data, critic, actor, cfg, cost, ep, k, learn=True, sink=sink
        )
        u_mean = u_sum / max(k - n0, 1)
        epochs.append(
            (ep, sum_e_sq, acc, float(np.linalg.norm(critic.Wc - Wc0)), float(np.linalg.norm(actor.Wa - Wa0)))
        )
        log.info("epoch %d  sum|e|^2=%.6g  acc=%.4f", ep, sum_e_sq, acc)
    if cfg.epochs and cfg.consolidate == "mean":
        model = apply_control(model, u_mean)
    diag = RunDiagnostics(
        np.array(sink, dtype=_STEP_DTYPE),
        np.array(epochs, dtype=_EPOCH_DTYPE),
        gate,
        time.perf_counter() - t0,
    )
    return model, diag, critic, actor


# --------------------------------------------------------------------------- evaluation


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # confusion[true, predicted]
    predictions: np.ndarray


def predict(model: ReservoirModel, values, dt: float) -> int:
    states = run_series(model, values, dt)
    return int(np.argmax(model.W_D @ states.mean(axis=0)))


def evaluate(model: ReservoirModel, dataset: LabeledSeriesDataset, dt: float, cfg: TrainConfig | None = None) -> EvalResult:
    """Feed-forward recall: argmax of the time-averaged decoded output per series."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    data = prepare_data(cfg, dataset) if cfg is not None else dataset
    preds = np.array([predict(model, s.values, dt) for s in data.series])
    conf = np.zeros((data.c, data.c), dtype=int)
    np.add.at(conf, (data.labels, preds), 1)
    return EvalResult(float(np.trace(conf)) / len(data), conf, preds)


# --------------------------------------------------------------------------- LQR self-test


@dataclass
class SelftestConfig:
    a: float = -1.0
    b: float = 1.0
    r: float = 1.0
    eta: float = 2.0
    alpha_c: float = 10.0
    alpha_a: float = 100.0
    dt: float = 0.01
    episode_len: float = 0.5
    steps: int = 20000
    pe_a0: float = 0.3
    pe_decay: float = 0.9
    seed: int = 0
    tol: float = 0.05
    hjb_tol: float = 1e-3


@dataclass
class SelftestReport:
    P_riccati: float
    gain_riccati: float
    gain_learned: float
    P_critic: float
    rel_error: float
    hjb_residual: float
    converged: bool
    gate: GateReport
    history: np.ndarray = field(repr=False, default=None)

    def summary(self) -> str:
        return "\n".join(
            [
                f"P_riccati     = {self.P_riccati:.6f}",
                f"P_learned     = {self.P_critic:.6f}   (critic weight / 2)",
                f"gain_riccati  = {self.gain_riccati:.6f}",
                f"gain_learned  = {self.gain_learned:.6f}   (-actor weight)",
                f"relative error = {self.rel_error:.3e}",
                f"HJB residual   = {self.hjb_residual:.3e}",
                "converged" if self.converged else "not converged",
            ]
        )


def lqr_selftest(cfg: SelftestConfig | None = None, force: bool = False) -> SelftestReport:
    """Run the actor-critic loop on de/dt = a e + b u with linear features.

    The exact answer is V = P e^2 with P from the scalar Riccati equation, so
    the critic weight should approach 2P and the actor weight -bP/r.
    Episodes restart from e = +/-1 every ``episode_len`` time units.
    """
    cfg = cfg or SelftestConfig()
    cost = CostConfig.scalar(cfg.eta, cfg.r, 1)
    g = np.array([[cfg.b]])
    f = lambda e: cfg.a * e  # noqa: E731
    per_ep = max(1, int(round(cfg.episode_len / cfg.dt)))
    schedule = PESchedule(a0=cfg.pe_a0, decay=cfg.pe_decay)
    starts = np.random.default_rng(cfg.seed).choice([-1.0, 1.0], size=max(1, -(-cfg.steps // per_ep)))

    def fresh():
        return CriticNet.zeros(IdentityFeatures(1), 1, cfg.alpha_c), ActorNet.zeros(IdentityFeatures(1), 1, cfg.alpha_a)

    # calibration: one episode with frozen weights
    critic, actor = fresh()
    acc = _CalibrationAccumulator()
    e = np.array([starts[0]])
    for k in range(per_ep):
        res = adp_step(e, f(e), g, critic, actor, cost, cfg.dt, pe_noise(1, schedule, k, cfg.seed + 1), learn=False)
        acc.add(res.z_c, res.e_dot, g)
        e = e + cfg.dt * res.e_dot
    gate = validate_hyperparams(cfg.eta, cfg.alpha_c, cfg.alpha_a, cost, acc.result())
    if not gate.passed:
        if not force:
            raise GateError(gate)
        gate.overridden = True

    history = []
    for k in range(cfg.steps):
        ep, i = divmod(k, per_ep)
        if i == 0:
            e = np.array([starts[ep]])
        noise = pe_noise(1, schedule, k, cfg.seed, ep)
        res = adp_step(e, f(e), g, critic, actor, cost, cfg.dt, noise)
        critic, actor = res.critic, res.actor
        if not (np.all(np.isfinite(critic.Wc)) and abs(critic.Wc[0, 0]) < 1e6 and abs(actor.Wa[0, 0]) < 1e6):
            break
        e = e + cfg.dt * res.e_dot
        if i == per_ep - 1 or k == cfg.steps - 1:
            history.append((ep, critic.Wc[0, 0], actor.Wa[0, 0]))

    P = riccati_scalar(cfg.a, cfg.b, cfg.r, cfg.eta)
    gain_star = cfg.b * P / cfg.r
    gain = -float(actor.Wa[0, 0])
    w_c = float(critic.Wc[0, 0])
    scale = abs(gain_star) if gain_star != 0 else 1.0
    rel = abs(gain - gain_star) / scale
    res_hjb = hjb_residual([1.0], [w_c], [cfg.a], g, cost)
    converged = cfg.steps > 0 and bool(np.isfinite(rel)) and rel < cfg.tol and abs(res_hjb) < cfg.hjb_tol
    return SelftestReport(
        P, gain_star, gain, w_c / 2, rel, res_hjb, converged, gate, np.array(history).reshape(-1, 3)
    )
