"""The ((2,3)) threshold secret sharing protocol on Gaussian states.

Player modes are ordered P1, P2, P3.  The Dealer mixes the secret with
resource mode r1 on a hybrid ring,

    a1 = (a_alpha + a_r1) / sqrt2,   a2 = (a_alpha - a_r1) / sqrt2,   a3 = a_r2,

and each pair of players has a reconstruction scheme: {1,2} undoes the hybrid
ring, {2,3} and {1,3} run a Josephson-interferometer two-mode squeezer built
from two degenerate JPAs of gain G.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import gaussian as gs
from .gaussian import GaussianState
from .metrics import MetricReport, effective_noise, fidelity, mutual_information, negativity, purity

CARRIER_FREQUENCY_HZ = 5.4e9
BACKGROUND_TEMPERATURE_K = 0.05
NBAR_50MK = gs.bose_einstein(CARRIER_FREQUENCY_HZ, BACKGROUND_TEMPERATURE_K)

SCHEMES = ((1, 2), (1, 3), (2, 3))
OPTIMAL_GAIN_LIN = (math.sqrt(2) + 1) / (math.sqrt(2) - 1)


@dataclass(frozen=True)
class DeviceModel:
    """Imperfections of the hardware.  The defaults describe an ideal device.

    jpa_noise_coeff
        ``c`` in the excess-noise law ``c (G_lin - 1) / 4`` added per quadrature
        behind every JPA (entanglement JPAs use ``G_lin = 10^(S/10)``).
    hybrid_phase_mismatch
        Phase error (rad) of the {1,2} reconstruction hybrid relative to the Dealer's.
    input_efficiency
        Power transmission of the secret's input line ahead of the Dealer.
    path_efficiency
        Power transmission of each player's path.
    interferometer_imbalance
        Relative squeezing-strength mismatch ``eps`` of the two reconstruction
        JPAs (``s (1 + eps)`` and ``s (1 - eps)``).
    env_nbar
        Thermal occupation of the environment that path loss and erasures couple in.
    """

    input_nbar: float = 0.0
    jpa_noise_coeff: float = 0.0
    hybrid_phase_mismatch: float = 0.0
    input_efficiency: float = 1.0
    path_efficiency: float = 1.0
    interferometer_imbalance: float = 0.0
    env_nbar: float = 0.0

    def __post_init__(self):
        if self.input_nbar < 0 or self.env_nbar < 0:
            raise ValueError("thermal occupations must be non-negative")
        if self.jpa_noise_coeff < 0:
            raise ValueError("jpa_noise_coeff must be non-negative")
        for name in ("input_efficiency", "path_efficiency"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 <= self.interferometer_imbalance < 1.0:
            raise ValueError("interferometer_imbalance must lie in [0, 1)")

    @classmethod
    def ideal(cls) -> "DeviceModel":
        return cls()

    @classmethod
    def calibrated(cls) -> "DeviceModel":
        """Preset fitted to the reported security window and erasure advantage.

        These are fitted values, not measured hardware parameters.  The input
        efficiency and input noise are solved so that the {2,3} output at
        S = 6 dB, G = 7 dB has the gain and noise behind a window of roughly
        [1.92, 3.81] with peak excess 0.0073.  The phase mismatch and
        interferometer imbalance were then picked by a grid scan against the
        location and height of the erasure advantage maximum.
        """
        return cls(**CALIBRATED_PRESET)

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceModel":
        data = dict(data or {})
        preset = data.pop("preset", "ideal")
        base = {"ideal": cls.ideal, "calibrated": cls.calibrated}[preset]()
        return replace(base, **data)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def is_noisy(self) -> bool:
        return self != DeviceModel()


DEVICE_FIELDS = tuple(f.name for f in fields(DeviceModel))

# fitted, see DeviceModel.calibrated
CALIBRATED_PRESET = dict(
    input_nbar=0.0542772,
    jpa_noise_coeff=0.0,
    hybrid_phase_mismatch=0.32,
    input_efficiency=0.6760317,
    path_efficiency=1.0,
    interferometer_imbalance=0.03,
    env_nbar=0.0,
)


def parse_scheme(scheme) -> tuple[int, int]:
    """Accept ``(2, 3)``, ``"23"``, ``"{2,3}"`` or ``"2,3"``."""
    if isinstance(scheme, str):
        digits = [int(c) for c in scheme if c.isdigit()]
    else:
        digits = [int(c) for c in scheme]
    key = tuple(sorted(digits))
    if key not in SCHEMES:
        raise ValueError(f"unknown reconstruction scheme {scheme!r}")
    return key


def scheme_label(scheme) -> str:
    i, j = parse_scheme(scheme)
    return f"{{{i},{j}}}"


def adversary_of(scheme) -> int:
    """Player number (1-based) excluded from ``scheme``."""
    return ({1, 2, 3} - set(parse_scheme(scheme))).pop()


@dataclass(frozen=True)
class ProtocolParams:
    squeezing_db: float = 6.0
    reconstruction_gain_db: float = 8.0
    secret_alpha: complex = math.sqrt(1.3)
    scheme: tuple = (2, 3)

    def __post_init__(self):
        if self.squeezing_db < 0:
            raise ValueError("squeezing level must be >= 0 dB")
        if self.reconstruction_gain_db < 0:
            raise ValueError("reconstruction gain must be >= 0 dB")
        object.__setattr__(self, "scheme", parse_scheme(self.scheme))
        object.__setattr__(self, "secret_alpha", complex(self.secret_alpha))


@dataclass(frozen=True)
class Shares:
    state: GaussianState
    r: float

    def player(self, p: int) -> GaussianState:
        return gs.partial_trace(self.state, [p - 1])


@dataclass(frozen=True)
class AffineOutput:
    """Single-mode output whose mean is affine in the secret amplitude.

    mean(alpha) = transfer @ (Re alpha, Im alpha) + offset; cov does not depend on alpha.
    """

    transfer: np.ndarray
    offset: np.ndarray
    cov: np.ndarray

    @classmethod
    def from_pipeline(cls, run: Callable[[complex], GaussianState]) -> "AffineOutput":
        s0, s1, si = run(0.0), run(1.0), run(1j)
        transfer = np.column_stack([s1.mean - s0.mean, si.mean - s0.mean])
        return cls(transfer, s0.mean.copy(), s0.cov.copy())

    def state(self, alpha: complex) -> GaussianState:
        alpha = complex(alpha)
        return GaussianState(self.transfer @ [alpha.real, alpha.imag] + self.offset, self.cov)

    @property
    def k(self) -> float:
        """Phase-averaged power gain ``|T|_F^2 / 2``."""
        return float(np.sum(self.transfer ** 2) / 2.0)

    @property
    def v_out(self) -> float:
        return float(np.trace(self.cov) / 2.0)


@dataclass(frozen=True)
class ReconstructionResult:
    output: GaussianState
    amplitude_gain_sqrt_k: float
    v_out: float
    channel: AffineOutput | None = None

    @property
    def k(self) -> float:
        return self.amplitude_gain_sqrt_k ** 2


# -- gain conventions ---------------------------------------------------------

def jpa_noise(gain_lin: float, device: DeviceModel) -> float:
    """Excess classical variance per quadrature added behind a JPA."""
    return device.jpa_noise_coeff * (gain_lin - 1.0) / 4.0


def reconstruction_squeezing(gain_db: float) -> float:
    """Two-mode squeezing parameter of the reconstruction interferometer.

    Each degenerate JPA with power gain ``G_lin`` squeezes by ``s = ln(G_lin) / 2``;
    two of them between hybrids act as a two-mode squeezer with the same ``s``.
    """
    if gain_db < 0:
        raise ValueError("reconstruction gain below 0 dB")
    return 0.5 * math.log(10 ** (gain_db / 10))


def eta_gamma(gain_db: float) -> tuple[float, float]:
    """Amplification ``eta`` and resource weight ``gamma`` of ``a_out = eta(sqrt2 a2 + gamma a3^dag)``."""
    s = reconstruction_squeezing(gain_db)
    return math.cosh(s) / math.sqrt(2.0), math.sqrt(2.0) * math.tanh(s)


def gain_db_from_lin(gain_lin: float) -> float:
    return 10.0 * math.log10(gain_lin)


# -- protocol steps -----------------------------------------------------------

def make_tms_resource(squeezing_db: float, device: DeviceModel = DeviceModel()) -> GaussianState:
    """Two orthogonally squeezed vacua combined on a balanced beam splitter."""
    if squeezing_db < 0:
        raise ValueError("squeezing level must be >= 0 dB")
    r = gs.db_to_r(squeezing_db)
    noise = jpa_noise(10 ** (squeezing_db / 10), device)
    state = gs.make_vacuum(2)
    state = gs.squeeze(state, 0, r, 0.0)
    state = gs.squeeze(state, 1, r, math.pi / 2)
    state = gs.add_classical_noise(state, 0, noise)
    state = gs.add_classical_noise(state, 1, noise)
    return gs.beam_splitter(state, 0, 1, 0.5, 0.0)


def input_state(alpha: complex, device: DeviceModel = DeviceModel()) -> GaussianState:
    state = gs.add_classical_noise(gs.make_coherent(alpha), 0, device.input_nbar / 2.0)
    return gs.loss_channel(state, 0, device.input_efficiency, device.env_nbar)


def input_variance(device: DeviceModel = DeviceModel()) -> float:
    return 0.25 + device.input_nbar / 2.0


def dealer(secret_alpha: complex, resource: GaussianState, device: DeviceModel = DeviceModel(),
           r: float = float("nan")) -> Shares:
    if resource.n_modes != 2:
        raise ValueError("resource must be a two-mode state")
    state = gs.tensor(input_state(secret_alpha, device), resource)
    state = gs.hybrid_ring(state, 0, 1, 0.0)
    for mode in range(3):
        state = gs.loss_channel(state, mode, device.path_efficiency, device.env_nbar)
    return Shares(state, r)


def share(secret_alpha: complex, squeezing_db: float, device: DeviceModel = DeviceModel()) -> Shares:
    return dealer(secret_alpha, make_tms_resource(squeezing_db, device), device, gs.db_to_r(squeezing_db))


def _reconstruct_12_state(state: GaussianState, device: DeviceModel) -> GaussianState:
    out = gs.hybrid_ring(state, 0, 1, device.hybrid_phase_mismatch)
    return gs.partial_trace(out, [0])


def _interferometer(state: GaussianState, i: int, j: int, gain_db: float, device: DeviceModel) -> GaussianState:
    """Hybrid, two degenerate JPAs squeezing orthogonal quadratures, inverse hybrid."""
    s = reconstruction_squeezing(gain_db)
    eps = device.interferometer_imbalance
    noise = jpa_noise(10 ** (gain_db / 10), device)
    state = gs.beam_splitter(state, i, j, 0.5, 0.0)
    state = gs.squeeze(state, i, s * (1 + eps), math.pi / 2)
    state = gs.squeeze(state, j, s * (1 - eps), 0.0)
    state = gs.add_classical_noise(state, i, noise)
    state = gs.add_classical_noise(state, j, noise)
    return gs.beam_splitter(state, i, j, 0.5, math.pi)


def _reconstruct_pair_state(state: GaussianState, scheme: tuple[int, int], gain_db: float,
                            device: DeviceModel) -> GaussianState:
    if scheme == (1, 2):
        return _reconstruct_12_state(state, device)
    if scheme == (1, 3):
        # a_out = eta(sqrt2 a1 - gamma a3^dag): flip the sign of a3 first
        state = gs.phase_shift(state, 2, math.pi)
        i = 0
    else:
        i = 1
    out = _interferometer(state, i, 2, gain_db, device)
    return gs.partial_trace(out, [i])


def _result(out: GaussianState, channel: AffineOutput | None) -> ReconstructionResult:
    sqrt_k = math.sqrt(channel.k) if channel is not None else float("nan")
    return ReconstructionResult(out, sqrt_k, float(np.trace(out.cov) / 2.0), channel)


def reconstruct_12(shares: Shares, device: DeviceModel = DeviceModel(),
                   channel: AffineOutput | None = None) -> ReconstructionResult:
    """Run the Dealer's hybrid ring backwards on P1 and P2."""
    return _result(_reconstruct_12_state(shares.state, device), channel)


def reconstruct_23(shares: Shares, gain_db: float, device: DeviceModel = DeviceModel(),
                   channel: AffineOutput | None = None) -> ReconstructionResult:
    """Two-mode squeezing of P2 and P3, ``a_out = cosh s a2 + sinh s a3^dag``."""
    if gain_db < 0:
        raise ValueError("reconstruction gain below 0 dB")
    return _result(_reconstruct_pair_state(shares.state, (2, 3), gain_db, device), channel)


def reconstruct_13(shares: Shares, gain_db: float, device: DeviceModel = DeviceModel(),
                   channel: AffineOutput | None = None) -> ReconstructionResult:
    if gain_db < 0:
        raise ValueError("reconstruction gain below 0 dB")
    return _result(_reconstruct_pair_state(shares.state, (1, 3), gain_db, device), channel)


def scheme_channel(squeezing_db: float, gain_db: float, scheme, device: DeviceModel = DeviceModel(),
                   erased: frozenset = frozenset()) -> AffineOutput:
    """Affine description of a reconstruction scheme's output as a function of the secret.

    ``erased`` lists players (1-based) whose shares are replaced by vacuum
    (or by ``device.env_nbar`` thermal noise) before reconstruction.
    """
    scheme = parse_scheme(scheme)
    resource = make_tms_resource(squeezing_db, device)

    def run(alpha):
        state = dealer(alpha, resource, device).state
        for p in erased:
            state = gs.loss_channel(state, p - 1, 0.0, device.env_nbar)
        return _reconstruct_pair_state(state, scheme, gain_db, device)

    return AffineOutput.from_pipeline(run)


def share_channel(squeezing_db: float, player: int, device: DeviceModel = DeviceModel(),
                  erased: frozenset = frozenset()) -> AffineOutput:
    """Affine description of a single player's share."""
    resource = make_tms_resource(squeezing_db, device)

    def run(alpha):
        state = dealer(alpha, resource, device).state
        if player in erased:
            state = gs.loss_channel(state, player - 1, 0.0, device.env_nbar)
        return gs.partial_trace(state, [player - 1])

    return AffineOutput.from_pipeline(run)


def reconstruct(params: ProtocolParams, device: DeviceModel = DeviceModel()) -> ReconstructionResult:
    channel = scheme_channel(params.squeezing_db, params.reconstruction_gain_db, params.scheme, device)
    shares = share(params.secret_alpha, params.squeezing_db, device)
    if params.scheme == (1, 2):
        return reconstruct_12(shares, device, channel)
    if params.scheme == (1, 3):
        return reconstruct_13(shares, params.reconstruction_gain_db, device, channel)
    return reconstruct_23(shares, params.reconstruction_gain_db, device, channel)


# -- adversary ----------------------------------------------------------------

def adversary_view(shares: Shares, scheme) -> GaussianState:
    """Reduced state of the player left out of ``scheme``."""
    return shares.player(adversary_of(scheme))


def best_rescale(state: GaussianState, secret_alpha: complex, max_gain: float = 4.0) -> tuple[float, float]:
    """Best fidelity over quantum-limited phase-insensitive rescalings; returns (fidelity, gain)."""
    target = gs.make_coherent(secret_alpha)

    def fid(g):
        return fidelity(gs.amplifier_channel(state, 0, g), target)

    grid = np.linspace(0.0, max_gain, 41)
    vals = [fid(g) for g in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda g: -fid(g), bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    best_f, best_g = vals[i], grid[i]
    if -res.fun > best_f:
        best_f, best_g = -res.fun, float(res.x)
    return float(best_f), float(best_g)


def adversary_best_fidelity(adv_state: GaussianState, secret_alpha: complex,
                            optimize_rescale: bool = False) -> float:
    """Fidelity of the adversary's share with the secret.

    With ``optimize_rescale`` the adversary first applies the best
    quantum-limited phase-insensitive amplifier or attenuator to the share.
    """
    if adv_state.n_modes != 1:
        raise ValueError("adversary state must be single-mode")
    if optimize_rescale:
        return best_rescale(adv_state, secret_alpha)[0]
    return fidelity(adv_state, gs.make_coherent(secret_alpha))


# -- full run -----------------------------------------------------------------

@dataclass(frozen=True)
class Transcript:
    params: ProtocolParams
    resource: GaussianState
    shares: Shares
    result: ReconstructionResult
    adversary: GaussianState
    adversary_fidelity: float
    n_eff_adv: float
    mi_adv: float
    report: MetricReport = field(repr=False)


def collaborator_noise(channel: AffineOutput, device: DeviceModel) -> float:
    """n_eff of an output channel, infinite if it carries no signal."""
    if channel.k <= 1e-300:
        return math.inf
    return effective_noise(1.0, input_variance(device), math.sqrt(channel.k), channel.v_out)


def run_protocol(params: ProtocolParams, device: DeviceModel = DeviceModel(), sigma_sq: float = 3.0,
                 optimize_rescale: bool = True) -> Transcript:
    resource = make_tms_resource(params.squeezing_db, device)
    shares = dealer(params.secret_alpha, resource, device, gs.db_to_r(params.squeezing_db))
    result = reconstruct(params, device)
    adv = adversary_view(shares, params.scheme)
    f_adv = adversary_best_fidelity(adv, params.secret_alpha, optimize_rescale)

    n_eff = collaborator_noise(result.channel, device)
    adv_channel = share_channel(params.squeezing_db, adversary_of(params.scheme), device)
    n_eff_adv = collaborator_noise(adv_channel, device)

    report = MetricReport(
        fidelity=fidelity(result.output, gs.make_coherent(params.secret_alpha)),
        purity=purity(resource),
        negativity=negativity(resource),
        mi_nats=mutual_information(sigma_sq, n_eff),
        n_eff=n_eff,
    )
    return Transcript(params, resource, shares, result, adv, f_adv, n_eff_adv,
                      mutual_information(sigma_sq, n_eff_adv), report)


def collaborator_fidelity(alpha: complex, squeezing_db: float, gain_db: float, scheme=(2, 3),
                          device: DeviceModel = DeviceModel()) -> float:
    out = scheme_channel(squeezing_db, gain_db, scheme, device).state(alpha)
    return fidelity(out, gs.make_coherent(alpha))


def optimal_gain_db(alpha: complex, squeezing_db: float, device: DeviceModel = DeviceModel(),
                    bounds: tuple[float, float] = (0.0, 20.0)) -> tuple[float, float]:
    """Gain (dB) maximizing the {2,3} fidelity; returns (gain_db, fidelity)."""
    res = minimize_scalar(lambda g: -collaborator_fidelity(alpha, squeezing_db, g, (2, 3), device),
                          bounds=bounds, method="bounded", options={"xatol": 1e-9})
    return float(res.x), float(-res.fun)
