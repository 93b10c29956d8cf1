"""Saturated single-cell model of the 802.11 distributed coordination function.

A cell is one access point plus the stations associated with it, all within
carrier-sense range of each other.  Under saturation every station always has
a frame queued, so its behaviour is captured by two coupled quantities:

* ``beta`` -- the probability that a station attempts transmission in a
  given idle slot.  It follows from the mean backoff window averaged over
  retry stages: after each collision the contention window doubles (up to a
  cap), so a station that collides often attempts less frequently.
* ``gamma`` -- the conditional collision probability seen by an attempt.
  With ``n`` stations attempting independently, an attempt collides exactly
  when at least one of the other ``n - 1`` stations picks the same slot.

The classical decoupling approximation closes these two into a fixed point
``beta = G(gamma)``, ``gamma = 1 - (1 - beta)**(n-1)``, solved here by damped
iteration.  Throughput then follows from renewal-reward over slot outcomes
(idle, success, collision) with frame durations computed from the PHY/MAC
timing parameters.

Defaults target 11 Mb/s DSSS with long preambles: 20 us slots, DIFS 50 us,
SIFS 10 us, a 192 us PHY preamble+header on every frame, 28-byte MAC
overhead sent at the data rate, and 14-byte control frames (ACK) sent at
the 2 Mb/s basic rate.

Two conventions worth calling out:

* A single saturated station never collides and never idles between
  transmissions in this model's timescale, so its throughput is pinned to
  ``1 / T_success`` rather than the renewal-reward expression (which would
  charge it backoff idle time that a lone greedy sender largely amortises).
* TCP download traffic is mapped onto an equivalent saturated cell with two
  contenders (the AP streaming data downlink, and the stations' returning
  ACK stream behaving as one aggregate contender) exchanging frames of the
  average of the data and TCP-ACK sizes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigError, ConvergenceError

#: TCP/IP header overhead carried inside an 802.11 data frame payload, and
#: equally the size of a bare TCP ACK segment (40 bytes).
TCP_IP_HEADER_BITS = 320

_ACCESS_MODES = ("basic", "rtscts")


@dataclass(frozen=True)
class MacParams:
    """Timing and framing parameters of the MAC/PHY.

    Times are seconds, sizes are bits, rates are bits per second.
    """

    slot_time: float = 20e-6
    difs: float = 50e-6
    sifs: float = 10e-6
    phy_header_time: float = 192e-6
    mac_header_bits: int = 224
    ack_bits: int = 112
    rts_bits: int = 160
    cts_bits: int = 112
    data_rate: float = 11e6
    control_rate: float = 2e6
    payload_bits: int = 8000
    cw_min: int = 32
    backoff_doubling_cap: int = 5
    retry_limit: int = 7
    access_mode: str = "basic"

    def __post_init__(self) -> None:
        for name in ("slot_time", "difs", "sifs", "data_rate", "control_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("phy_header_time",):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("mac_header_bits", "ack_bits", "rts_bits", "cts_bits",
                     "payload_bits"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.cw_min < 1:
            raise ConfigError("cw_min must be at least 1")
        if self.backoff_doubling_cap < 0:
            raise ConfigError("backoff_doubling_cap must be non-negative")
        if self.retry_limit < 0:
            raise ConfigError("retry_limit must be non-negative")
        if self.access_mode not in _ACCESS_MODES:
            raise ConfigError(
                f"access_mode must be one of {_ACCESS_MODES}, "
                f"got {self.access_mode!r}")


@dataclass(frozen=True)
class SingleCellResult:
    """Solved operating point of one saturated cell.

    ``throughput_pps`` is the aggregate cell throughput in packets per
    second; divide by the number of stations for per-station throughput.
    """

    beta: float
    gamma: float
    throughput_pps: float


def mean_backoffs(params: MacParams) -> tuple[float, ...]:
    """Mean backoff drawn at each retry stage, in slots.

    Stage ``k`` draws uniformly from a window of ``2**min(k, cap) * cw_min``
    slots, so the mean is half the window.
    """
    return tuple(
        2 ** min(k, params.backoff_doubling_cap) * params.cw_min / 2
        for k in range(params.retry_limit + 1))


def attempt_prob_G(gamma: float, params: MacParams) -> float:
    """Per-slot attempt probability of a station facing collision prob ``gamma``.

    This is the ratio of the expected number of attempts per frame to the
    expected number of backoff slots spent on it, with the retry-stage
    distribution geometric in ``gamma`` and truncated at the retry limit.
    At ``gamma = 0`` it reduces to ``1 / mean first-stage backoff``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    b = mean_backoffs(params)
    weights = [gamma ** k for k in range(params.retry_limit + 1)]
    attempts = sum(weights)
    slots = sum(w * bk for w, bk in zip(weights, b))
    return attempts / slots


def frame_durations(params: MacParams) -> tuple[float, float]:
    """Durations in seconds of a successful exchange and of a collision.

    A success is DATA + SIFS + ACK + DIFS.  A basic-access collision ties
    the channel for the full data frame plus DIFS; with RTS/CTS only the
    RTS is lost.  Control frames go out at the basic rate, everything else
    at the data rate, and every frame pays the PHY preamble+header time.
    """
    t_data = (params.phy_header_time
              + (params.mac_header_bits + params.payload_bits) / params.data_rate)
    t_ack = params.phy_header_time + params.ack_bits / params.control_rate
    t_success = t_data + params.sifs + t_ack + params.difs
    if params.access_mode == "rtscts":
        t_rts = params.phy_header_time + params.rts_bits / params.control_rate
        t_collision = t_rts + params.difs
    else:
        t_collision = t_data + params.difs
    return t_success, t_collision


def single_cell_fixed_point(n: int, params: MacParams, *,
                            damping: float = 0.5, tol: float = 1e-10,
                            max_iter: int = 10_000) -> SingleCellResult:
    """Solve the beta/gamma fixed point for ``n`` saturated stations.

    Damped iteration ``gamma <- (1-d)*gamma + d*(1 - (1-G(gamma))**(n-1))``
    starting from ``gamma = 0``.  Raises ConvergenceError (carrying the
    residual and the tail of the iterate history) if the update size does
    not fall below ``tol`` within ``max_iter`` sweeps.
    """
    if n < 1:
        raise ConfigError(f"need at least one station, got n={n}")
    gamma = 0.0
    history: list[float] = []
    residual = float("inf")
    for _ in range(max_iter):
        beta = attempt_prob_G(gamma, params)
        gamma_new = 1.0 - (1.0 - beta) ** (n - 1)
        gamma_next = (1.0 - damping) * gamma + damping * gamma_new
        residual = abs(gamma_next - gamma)
        gamma = gamma_next
        history.append(gamma)
        if residual < tol:
            beta = attempt_prob_G(gamma, params)
            return SingleCellResult(
                beta=beta, gamma=gamma,
                throughput_pps=single_cell_throughput(n, params, beta=beta))
    raise ConvergenceError(
        f"single-cell fixed point did not converge for n={n}",
        residual=residual, iterations=max_iter, history=history[-10:])


def single_cell_throughput(n: int, params: MacParams, *,
                           beta: float | None = None) -> float:
    """Aggregate saturation throughput of an ``n``-station cell, packets/s.

    Renewal-reward over slot outcomes: a slot is idle with no attempt,
    carries a success with exactly one, and a collision otherwise.  For
    ``n == 1`` the cell sends back-to-back successful frames, so the rate
    is ``1 / T_success`` by convention (see module docstring).
    """
    t_success, t_collision = frame_durations(params)
    if n == 1:
        return 1.0 / t_success
    if beta is None:
        beta = single_cell_fixed_point(n, params).beta
    p_tr = 1.0 - (1.0 - beta) ** n
    p_succ = n * beta * (1.0 - beta) ** (n - 1) / p_tr
    mean_slot = ((1.0 - p_tr) * params.slot_time
                 + p_tr * p_succ * t_success
                 + p_tr * (1.0 - p_succ) * t_collision)
    return p_tr * p_succ / mean_slot


def tcp_equivalent_cell(params: MacParams) -> tuple[int, MacParams]:
    """Map a TCP-download cell onto an equivalent saturated configuration.

    Persistent TCP downloads self-clock: the AP can only send as fast as
    ACKs return, so regardless of how many stations subscribe, the cell
    behaves like two saturated contenders (AP data vs. aggregate ACKs).
    Data frames carry the payload plus TCP/IP headers, ACK frames just the
    headers; the equivalent cell uses the average frame size of the two.

    Returns ``(n_equivalent, adjusted_params)``.
    """
    data_bits = params.payload_bits + TCP_IP_HEADER_BITS
    ack_bits = TCP_IP_HEADER_BITS
    avg_bits = round((data_bits + ack_bits) / 2)
    return 2, dataclasses.replace(params, payload_bits=avg_bits)


def mac_from_dict(raw: dict, base: MacParams | None = None) -> MacParams:
    """Build MacParams from a JSON-style mapping, on top of ``base`` defaults.

    Unknown keys raise ConfigError so typos in config files fail loudly.
    """
    base = base if base is not None else MacParams()
    valid = {f.name: f.type for f in dataclasses.fields(MacParams)}
    updates = {}
    for key, value in raw.items():
        if key not in valid:
            raise ConfigError(f"unknown MAC parameter {key!r}")
        updates[key] = value
    try:
        return dataclasses.replace(base, **updates)
    except TypeError as exc:
        raise ConfigError(f"bad MAC parameter value: {exc}") from exc
