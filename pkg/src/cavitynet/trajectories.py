"""Time-dependent atom-cavity coupling g(t).

A trajectory is any callable ``g(t) -> float`` (rad/s). Two concrete kinds
are provided: a constant coupling and the standing-wave coupling of an atom
whose axial displacement is a sum of harmonic components,

    x(t) = sum_p a_p cos(w_p t + phi_p),   g(t) = g0 cos(2 pi x(t) / wavelength).

The atom sits at an antinode when x = 0, so motion can only reduce |g|.
"""

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ConstantCoupling:
    value: float

    def __call__(self, t):
        return self.value

    @property
    def g_max(self):
        return abs(self.value)


@dataclass(frozen=True)
class StandingWaveCoupling:
    """Coupling of an atom oscillating about an antinode of the cavity mode.

    Parameters
    ----------
    g0 : float
        Antinode coupling (rad/s).
    wavelength : float
        Cavity wavelength (m).
    amplitudes : sequence of float
        Displacement amplitude of each harmonic component (m).
    omegas : sequence of float
        Angular frequency of each component (rad/s).
    phases : sequence of float
        Phase of each component (rad).
    """

    g0: float
    wavelength: float
    amplitudes: tuple = field(default=())
    omegas: tuple = field(default=())
    phases: tuple = field(default=())

    def __post_init__(self):
        n = len(self.amplitudes)
        if len(self.omegas) != n or len(self.phases) != n:
            raise ValueError("amplitudes, omegas and phases must have equal length")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        # Keep everything hashable and picklable.
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        object.__setattr__(self, "_k", 2.0 * math.pi / self.wavelength)
        # Few components: a plain loop beats numpy dispatch here.
        object.__setattr__(self, "_terms", tuple(zip(self.amplitudes, self.omegas, self.phases)))

    def displacement(self, t):
        cos = math.cos
        return sum(a * cos(w * t + p) for a, w, p in self._terms)

    def __call__(self, t):
        return self.g0 * math.cos(self._k * self.displacement(t))

    @property
    def g_max(self):
        return abs(self.g0)


def sinusoid(g0, wavelength, amplitude, frequency, phase=0.0):
    """Single-frequency oscillation about an antinode; ``frequency`` in Hz.

    Because the coupling depends only on ``|x|``, g(t) repeats every half
    oscillation period.
    """
    return StandingWaveCoupling(g0, wavelength, (amplitude,),
                                (2.0 * math.pi * frequency,), (phase,))


def from_spec(spec, *, nominal):
    """Build a trajectory from a ``{kind: ..., ...}`` block.

    ``nominal`` is the coupling used when the block omits ``g0``/``value``.
    Frequencies inside the block are plain rad/s, or Hz for ``sinusoid``.
    """
    if spec is None:
        return ConstantCoupling(nominal)
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return ConstantCoupling(float(spec.get("value", nominal)))
    if kind == "sinusoid":
        return sinusoid(float(spec.get("g0", nominal)), float(spec["wavelength"]),
                        float(spec["amplitude"]), float(spec["frequency"]),
                        float(spec.get("phase", 0.0)))
    if kind == "mode_sum":
        return StandingWaveCoupling(float(spec.get("g0", nominal)), float(spec["wavelength"]),
                                    tuple(spec["amplitudes"]), tuple(spec["omegas"]),
                                    tuple(spec["phases"]))
    raise ValueError(f"unknown trajectory kind {kind!r}")
