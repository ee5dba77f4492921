"""RF power delivery: link budget, harvesting, charge timing, beam sweeps.

All link arithmetic happens in dB; power crosses into watts only inside the
harvester model.  Duty-cycle regulation is modeled as time-averaged
stretching: the radiated (on-air) time is what the energy integral sees, and
wall-clock time is radiated time divided by the duty cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import HarvesterSpec, buffer_energy, harvester_output
from .errors import ParameterError

__all__ = [
    "C_LIGHT",
    "RfLink",
    "ArraySpec",
    "ChargeScenario",
    "friis_received_power",
    "harvest_power",
    "charge_time",
    "array_factor",
    "beam_sweep_precharge",
    "update_rate",
]

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class RfLink:
    """Continuous-wave power link from transmitter to tag.

    Gains are in dBi, powers in dBm.  The transmitter must respect the
    regulatory EIRP ceiling: p_t + g_t <= eirp_limit.
    """

    distance: float
    frequency: float = 869.5e6
    p_t: float = 27.0
    g_t: float = 0.0
    g_r: float = 2.15
    duty_cycle: float = 0.10
    eirp_limit: float = 27.0

    def __post_init__(self):
        if not self.distance > 0:
            raise ParameterError(f"distance must be positive, got {self.distance}")
        if not self.frequency > 0:
            raise ParameterError(f"frequency must be positive, got {self.frequency}")
        if self.p_t + self.g_t > self.eirp_limit + 1e-9:
            raise ParameterError(
                f"p_t ({self.p_t} dBm) + g_t ({self.g_t} dBi) exceeds the "
                f"{self.eirp_limit} dBm regulatory EIRP limit"
            )
        if not 0 < self.duty_cycle <= 1:
            raise ParameterError(
                f"duty_cycle must be in (0, 1], got {self.duty_cycle}"
            )

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.frequency


@dataclass(frozen=True)
class ArraySpec:
    """Uniform linear transmit array.

    ``spacing`` is in wavelengths; ``element_gain`` in dBi applies on top of
    the array factor.  A single element is an omnidirectional transmitter
    with gain equal to ``element_gain``.
    """

    n_elements: int = 1
    spacing: float = 0.5
    element_gain: float = 0.0
    steer_angle: float = 0.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise ParameterError(
                f"n_elements must be >= 1, got {self.n_elements}"
            )
        if not self.spacing > 0:
            raise ParameterError(f"spacing must be positive, got {self.spacing}")
        for name in ("steer_angle",):
            v = getattr(self, name)
            if not -90.0 <= v <= 90.0:
                raise ParameterError(f"{name} must be in [-90, 90], got {v}")


@dataclass(frozen=True)
class ChargeScenario:
    """Voltage excursion the harvester must supply.

    ``initial`` charges an empty capacitor up to charge-ready; ``update``
    refills only the working swing between over-discharge and charge-ready.
    """

    kind: str
    v_start: float
    v_end: float

    def __post_init__(self):
        if self.v_start < 0 or self.v_end <= self.v_start:
            raise ParameterError(
                f"need v_end > v_start >= 0, got v_start={self.v_start}, "
                f"v_end={self.v_end}"
            )

    @classmethod
    def initial(cls, harvester: HarvesterSpec) -> "ChargeScenario":
        return cls("initial", 0.0, harvester.v_chrdy)

    @classmethod
    def update(cls, harvester: HarvesterSpec) -> "ChargeScenario":
        return cls("update", harvester.v_ovdis, harvester.v_chrdy)


def friis_received_power(link: RfLink) -> float:
    """Received power in dBm under free-space (Friis) propagation."""
    path = 20.0 * math.log10(4.0 * math.pi * link.distance / link.wavelength)
    return link.p_t + link.g_t + link.g_r - path


def harvest_power(link: RfLink, harvester: HarvesterSpec) -> float:
    """DC power in watts harvested at the tag for this link."""
    return harvester_output(friis_received_power(link), harvester)


def charge_time(capacitance: float, scenario: ChargeScenario,
                p_harvest: float) -> float:
    """Radiated seconds to move the capacitor through the scenario's swing.

    Returns infinity when the harvested power is zero (the tag is
    unreachable at this distance).  Duty-cycle stretching is applied by the
    caller; this is pure energy over power.
    """
    if p_harvest < 0:
        raise ParameterError(f"p_harvest must be >= 0, got {p_harvest}")
    energy = buffer_energy(capacitance, scenario.v_end, scenario.v_start)
    if p_harvest == 0.0:
        return math.inf
    return energy / p_harvest


def array_factor(array: ArraySpec, target_angle: float) -> float:
    """Transmit gain in dBi toward ``target_angle`` degrees.

    Uniform linear array: the element phasors are summed for the direction
    offset sin(target) - sin(steer) and normalized so that a perfectly
    steered array gains a factor n_elements over one element.
    """
    if not -90.0 <= target_angle <= 90.0:
        raise ParameterError(
            f"target_angle must be in [-90, 90], got {target_angle}"
        )
    n = array.n_elements
    delta = math.sin(math.radians(target_angle)) - math.sin(
        math.radians(array.steer_angle))
    psi = 2.0 * math.pi * array.spacing * delta
    phasor = np.exp(1j * psi * np.arange(n)).sum()
    power_ratio = abs(phasor) ** 2 / n
    if power_ratio <= 0.0:
        return -math.inf
    return array.element_gain + 10.0 * math.log10(power_ratio)


def _swept_angles(step: float) -> np.ndarray:
    if not 0 < step <= 180:
        raise ParameterError(f"sweep step must be in (0, 180], got {step}")
    return np.arange(-90.0, 90.0 + step / 2, step)


def beam_sweep_precharge(
    array: ArraySpec,
    tag_angle: float,
    dwell: float,
    step: float,
    link: RfLink,
    harvester: HarvesterSpec,
    capacitance: float,
    integrator_step: float | None = None,
) -> float:
    """Wall-clock seconds for a sweeping beam to fill an empty capacitor.

    The beam steers across [-90, 90] degrees in ``step`` increments,
    dwelling ``dwell`` radiated seconds per direction and cycling until the
    capacitor reaches charge-ready.  The tag sits at ``tag_angle``; each
    dwell charges with the array gain toward the tag for that steering.
    The link's own g_t is replaced by the array gain here.

    Returns infinity when no steering direction can power the tag at all.
    ``integrator_step`` switches from exact per-dwell accumulation to a
    fixed-step energy integrator (useful for cross-checks).
    """
    if not dwell > 0:
        raise ParameterError(f"dwell must be positive, got {dwell}")
    angles = _swept_angles(step)
    target = buffer_energy(capacitance, harvester.v_chrdy, 0.0)
    path = 20.0 * math.log10(4.0 * math.pi * link.distance / link.wavelength)

    powers = []
    for steer in angles:
        gain = array_factor(
            ArraySpec(array.n_elements, array.spacing, array.element_gain,
                      float(steer)),
            tag_angle,
        )
        p_in = link.p_t + gain + link.g_r - path
        powers.append(harvester_output(p_in, harvester) if math.isfinite(p_in)
                      else 0.0)
    if max(powers) == 0.0:
        return math.inf

    energy = 0.0
    radiated = 0.0
    dwell_idx = 0
    while energy < target:
        p = powers[dwell_idx % len(powers)]
        if integrator_step is None:
            if p > 0 and energy + p * dwell >= target:
                radiated += (target - energy) / p
                energy = target
            else:
                energy += p * dwell
                radiated += dwell
        else:
            t_in_dwell = 0.0
            while t_in_dwell < dwell and energy < target:
                dt = min(integrator_step, dwell - t_in_dwell)
                energy += p * dt
                radiated += dt
                t_in_dwell += dt
        dwell_idx += 1
    return radiated / link.duty_cycle


def update_rate(charge_s: float, duty_cycle: float,
                measurement_overhead_s: float = 0.0) -> float:
    """Position updates per hour given a per-update charge requirement.

    The charge must be gathered under the duty cycle, so each update costs
    charge_s / duty_cycle plus the measurement overhead in wall-clock time.
    An infinite charge time yields a rate of zero.
    """
    if not charge_s > 0:
        raise ParameterError(f"charge_s must be positive, got {charge_s}")
    if not 0 < duty_cycle <= 1:
        raise ParameterError(f"duty_cycle must be in (0, 1], got {duty_cycle}")
    if measurement_overhead_s < 0:
        raise ParameterError(
            f"measurement_overhead_s must be >= 0, got {measurement_overhead_s}"
        )
    period = charge_s / duty_cycle + measurement_overhead_s
    return 3600.0 / period
