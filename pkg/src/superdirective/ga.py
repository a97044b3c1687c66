"""Genetic algorithm for beamforming under an excitation amplitude-range constraint.

Each element excitation is one chromosome: ``x`` amplitude bits followed by
``y`` phase bits, most significant bit first. Amplitude code ``a`` decodes to
``1 + a * (P - 1) / (2**x - 1)`` and phase code ``c`` to ``c * 2 pi / 2**y``, so
every genome satisfies ``1 <= |b_i| <= P`` by construction and the fitness
needs no penalty term.

Bit fields map to codes either as plain binary or as reflected Gray code
(the default). Under plain binary, neighbouring codes such as 127 and 128 sit
eight bit flips apart, and the superdirective quotient is sharp enough that
the search stalls in those Hamming cliffs; Gray code keeps every unit step a
single flip.

Genomes are ``uint8`` arrays of shape ``(M, x + y)``; populations stack them
into ``(I, M, x + y)``. All randomness flows through one ``numpy.random.Generator``
owned by the driver, so a run is reproducible from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamform import BeamVector, directivity_quotient, optimal_beamformer, project_to_range
from .errors import NumericalError
from .fieldmodel import ArrayFieldMatrix

IMPROVEMENT_TOL = 1e-12


CODINGS = ("gray", "binary")


@dataclass(frozen=True)
class QuantizationSpec:
    P: float
    x: int
    y: int
    coding: str = "gray"

    def __post_init__(self):
        if not self.P > 1:
            raise ValueError(f"range constraint P must exceed 1, got {self.P}")
        if self.x < 1 or self.y < 1:
            raise ValueError("amplitude and phase bit counts must be >= 1")
        if self.coding not in CODINGS:
            raise ValueError(f"coding must be one of {CODINGS}")

    @classmethod
    def from_unit(cls, amp_unit: float, x: int, y: int, coding: str = "gray") -> "QuantizationSpec":
        """Quantization whose amplitude step is ``amp_unit`` (P = 1 + (2**x - 1) * amp_unit)."""
        return cls(1.0 + (2**x - 1) * amp_unit, x, y, coding)

    @property
    def amp_unit(self) -> float:
        return (self.P - 1.0) / (2**self.x - 1)

    @property
    def phase_unit(self) -> float:
        return 2.0 * np.pi / 2**self.y

    @property
    def bits(self) -> int:
        return self.x + self.y


def make_quantization(P: float, x: int, y: int, coding: str = "gray") -> QuantizationSpec:
    return QuantizationSpec(float(P), int(x), int(y), coding)


def _weights(n: int) -> np.ndarray:
    return 2 ** np.arange(n - 1, -1, -1, dtype=np.int64)


def codes(genome: np.ndarray, spec: QuantizationSpec):
    """Integer (amplitude, phase) codes of a genome or population."""
    g = np.asarray(genome, dtype=np.int64)
    amp, phase = g[..., : spec.x], g[..., spec.x:]
    if spec.coding == "gray":
        amp = np.bitwise_xor.accumulate(amp, axis=-1)
        phase = np.bitwise_xor.accumulate(phase, axis=-1)
    return amp @ _weights(spec.x), phase @ _weights(spec.y)


def decode_amplitudes(genome: np.ndarray, spec: QuantizationSpec) -> np.ndarray:
    amp_code, _ = codes(genome, spec)
    amp = 1.0 + (spec.P - 1.0) * (amp_code / (2**spec.x - 1))
    return np.clip(amp, 1.0, spec.P)


def decode_array(genome: np.ndarray, spec: QuantizationSpec) -> np.ndarray:
    """Batched decode: ``(..., M, x + y)`` bits to ``(..., M)`` complex."""
    _, phase_code = codes(genome, spec)
    return decode_amplitudes(genome, spec) * np.exp(1j * phase_code * spec.phase_unit)


def decode(genome: np.ndarray, spec: QuantizationSpec) -> BeamVector:
    return BeamVector(decode_array(genome, spec), "ga")


def _to_bits(values: np.ndarray, n: int) -> np.ndarray:
    return ((values[..., None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def encode(b, spec: QuantizationSpec) -> np.ndarray:
    """Nearest-code genome for ``b`` (ties round to the even code)."""
    b = np.asarray(b, dtype=complex)
    amp = np.abs(b)
    # round-off slack so values produced by project_to_range are accepted
    slack = 1e-12 * spec.P
    if np.any(amp < 1.0 - slack) or np.any(amp > spec.P + slack):
        raise ValueError("infeasible amplitude: encode requires 1 <= |b_i| <= P")
    amp_code = np.clip(np.rint((amp - 1.0) / spec.amp_unit), 0, 2**spec.x - 1).astype(np.int64)
    phase = np.mod(np.angle(b), 2.0 * np.pi)
    phase_code = np.mod(np.rint(phase / spec.phase_unit).astype(np.int64), 2**spec.y)
    if spec.coding == "gray":
        amp_code, phase_code = amp_code ^ (amp_code >> 1), phase_code ^ (phase_code >> 1)
    return np.concatenate([_to_bits(amp_code, spec.x), _to_bits(phase_code, spec.y)], axis=-1)


def population_fitness(pop: np.ndarray, spec: QuantizationSpec, A: ArrayFieldMatrix) -> np.ndarray:
    """Directivity quotient over ``c`` for every genome of a population."""
    B = decode_array(pop, spec)
    num = np.abs(B @ A.E0) ** 2
    return num / A.power(B)


def fitness(genome: np.ndarray, spec: QuantizationSpec, A: ArrayFieldMatrix) -> float:
    """Single-genome fitness, bit-identical to the batched evaluation."""
    return float(population_fitness(np.asarray(genome)[None], spec, A)[0])


@dataclass(frozen=True)
class GAConfig:
    population: int = 200
    elites: int = 40
    mutation: float = 0.01
    max_iter: int = 500
    stagnation: int = 100
    f_max: float | None = None
    seed: int = 0
    seed_with_projection: bool = True
    fix_first_phase: bool = False

    def __post_init__(self):
        if not 2 <= self.elites < self.population:
            raise ValueError("need 2 <= elites < population")
        if not 0.0 <= self.mutation < 1.0:
            raise ValueError("mutation probability must lie in [0, 1)")
        if self.max_iter < 0 or self.stagnation < 1:
            raise ValueError("max_iter must be >= 0 and stagnation >= 1")


@dataclass(eq=False)
class GARunReport:
    best_genome: np.ndarray
    best_b: BeamVector
    best_fitness: float
    generations: int
    seed: int
    history: list  # (best, median) per generation, generation 0 first
    spec: QuantizationSpec
    lambda0: float
    seeded_fitness: float | None = None
    amplitude_bounds: tuple = field(default=(np.inf, -np.inf))  # over all evaluated individuals
    c: float = 4.0 * np.pi

    @property
    def directivity(self) -> float:
        return self.best_fitness * self.c

    def to_json(self) -> dict:
        return {
            "best_b": self.best_b.to_pairs(),
            "best_fitness": float(self.best_fitness),
            "directivity": float(self.directivity),
            "generations": int(self.generations),
            "seed": int(self.seed),
            "history": [{"best": float(b), "median": float(m)} for b, m in self.history],
            "range": float(self.spec.P),
            "amp_bits": self.spec.x,
            "phase_bits": self.spec.y,
            "amp_unit": float(self.spec.amp_unit),
            "coding": self.spec.coding,
            "lambda0": float(self.lambda0),
        }


def _zero_first_phase(pop: np.ndarray, spec: QuantizationSpec) -> None:
    pop[..., 0, spec.x:] = 0


def init_population(cfg: GAConfig, spec: QuantizationSpec, A: ArrayFieldMatrix, rng=None,
                    b_opt=None) -> np.ndarray:
    """Uniform random genomes; optionally slot 0 holds the projected closed-form solution."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    pop = rng.integers(0, 2, size=(cfg.population, A.num_elements, spec.bits), dtype=np.uint8)
    if cfg.seed_with_projection:
        if b_opt is None:
            b_opt = optimal_beamformer(A).b
        seed_b = project_to_range(b_opt, spec.P).b
        if cfg.fix_first_phase:
            # the quotient ignores a common phase, so rotate instead of truncating element 0
            seed_b = seed_b * np.exp(-1j * np.angle(seed_b[0]))
        pop[0] = encode(seed_b, spec)
    if cfg.fix_first_phase:
        _zero_first_phase(pop, spec)
    return pop


def select(pop: np.ndarray, fitnesses: np.ndarray, m: int) -> np.ndarray:
    """Indices of the ``m`` fittest genomes, best first; ties keep population order."""
    if not 0 < m < len(fitnesses):
        raise ValueError("need 0 < m < population size")
    return np.argsort(-np.asarray(fitnesses), kind="stable")[:m]


def crossover_batch(pa: np.ndarray, pb: np.ndarray, rng) -> np.ndarray:
    """Two-point crossover of every chromosome pair independently.

    For each chromosome draw ``p <= r`` from ``[0, L]``; the child is parent A
    with the half-open slice ``[p, r)`` taken from parent B.
    """
    if pa.shape != pb.shape:
        raise ValueError("parents must have equal shapes")
    L = pa.shape[-1]
    pts = np.sort(rng.integers(0, L + 1, size=pa.shape[:-1] + (2,)), axis=-1)
    pos = np.arange(L)
    mask = (pos >= pts[..., :1]) & (pos < pts[..., 1:])
    return np.where(mask, pb, pa)


def crossover(parent_a: np.ndarray, parent_b: np.ndarray, rng) -> np.ndarray:
    return crossover_batch(np.asarray(parent_a), np.asarray(parent_b), rng)


def mutate(genome: np.ndarray, probability: float, rng) -> np.ndarray:
    """Flip each bit independently with ``probability``."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError("mutation probability must lie in [0, 1]")
    g = np.asarray(genome, dtype=np.uint8)
    return g ^ (rng.random(g.shape) < probability).astype(np.uint8)


def _breed(elites: np.ndarray, n: int, cfg: GAConfig, spec: QuantizationSpec, rng) -> np.ndarray:
    m = len(elites)
    ia = rng.integers(0, m, size=n)
    ib = rng.integers(0, m - 1, size=n)
    ib = ib + (ib >= ia)  # two distinct parents
    children = mutate(crossover_batch(elites[ia], elites[ib], rng), cfg.mutation, rng)
    if cfg.fix_first_phase:
        _zero_first_phase(children, spec)
    return children


def run_ga(cfg: GAConfig, spec: QuantizationSpec, A: ArrayFieldMatrix) -> GARunReport:
    """Elitist GA: keep the top ``elites``, refill to ``population`` by crossover + mutation.

    Stops at ``max_iter`` generations, when the best fitness reaches ``f_max``
    (default: the unconstrained optimum), or after ``stagnation`` generations
    without improvement.
    """
    rng = np.random.default_rng(cfg.seed)
    opt = optimal_beamformer(A)
    f_max = opt.lambda0 if cfg.f_max is None else cfg.f_max
    pop = init_population(cfg, spec, A, rng, b_opt=opt.b)

    lo, hi = np.inf, -np.inf

    def evaluate(genomes):
        nonlocal lo, hi
        amp = decode_amplitudes(genomes, spec)
        lo, hi = min(lo, float(amp.min())), max(hi, float(amp.max()))
        f = population_fitness(genomes, spec, A)
        if not np.all(np.isfinite(f)):
            raise NumericalError("non-finite fitness")
        return f

    fit = evaluate(pop)
    seeded = float(fit[0]) if cfg.seed_with_projection else None
    best = float(fit.max())
    history = [(best, float(np.median(fit)))]
    stale = 0
    gen = 0
    n_children = cfg.population - cfg.elites
    while gen < cfg.max_iter and best < f_max:
        keep = select(pop, fit, cfg.elites)
        elites, elite_fit = pop[keep], fit[keep]
        children = _breed(elites, n_children, cfg, spec, rng)
        pop = np.concatenate([elites, children])
        fit = np.concatenate([elite_fit, evaluate(children)])
        gen += 1
        top = float(fit.max())
        history.append((top, float(np.median(fit))))
        if top > best + IMPROVEMENT_TOL:
            stale = 0
        else:
            stale += 1
        best = max(best, top)
        if stale >= cfg.stagnation:
            break
    i = int(select(pop, fit, 1)[0]) if len(fit) > 1 else 0
    genome = pop[i].copy()
    return GARunReport(genome, decode(genome, spec), float(fit[i]), gen, cfg.seed, history, spec,
                       opt.lambda0, seeded, (lo, hi), A.c)


def exhaustive_search(spec: QuantizationSpec, A: ArrayFieldMatrix, max_bits: int = 22):
    """Brute-force optimum over every genome; returns ``(best_fitness, genome)``."""
    M = A.num_elements
    n_bits = M * spec.bits
    if n_bits > max_bits:
        raise ValueError(f"exhaustive search over {n_bits} bits exceeds the {max_bits}-bit cap")
    best, best_g = -np.inf, None
    chunk = 1 << min(n_bits, 16)
    for start in range(0, 1 << n_bits, chunk):
        ids = np.arange(start, min(start + chunk, 1 << n_bits), dtype=np.int64)
        pop = _to_bits(ids, n_bits).reshape(len(ids), M, spec.bits)
        f = population_fitness(pop, spec, A)
        j = int(np.argmax(f))
        if f[j] > best:
            best, best_g = float(f[j]), pop[j].copy()
    return best, best_g

