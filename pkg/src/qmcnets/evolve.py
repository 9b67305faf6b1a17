"""Evolutionary search for binary generator matrices with small t-values.

An individual holds, for each of s_max dimensions, the strict upper triangle
of a unit-upper-triangular m_max x m_max matrix over Z_2.  Fitness is the sum
of t over every leading (m, s) block; smaller is better.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import LengthMismatch
from .genmat import GeneratorMatrixSet, decode_upper, encode_upper, encoding_length
from .rng import RngStream
from .tvalue import exact_t

__all__ = [
    "Individual",
    "EAConfig",
    "EAState",
    "objective",
    "crossover",
    "crossover_at",
    "mutate",
    "initial_state",
    "step",
    "run",
    "decode_individual",
    "individual_from_matrices",
    "random_individual",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass
class Individual:
    bits: np.ndarray  # (s_max, r) uint8
    fitness: int | None = None
    age: int = 0

    def copy(self):
        return Individual(self.bits.copy(), self.fitness, self.age)

    @property
    def key(self):
        return self.bits.tobytes()


@dataclass
class EAConfig:
    u: int = 400
    s_max: int = 8
    m_max: int = 10
    elite_fraction: float = 0.3
    mutation_rate: float = 0.05
    crossover: bool = True
    max_age: int = 10
    max_generations: int = 100
    seed: int = 0
    cumulative: bool = False
    seed_fraction: float = 0.5

    def __post_init__(self):
        if self.u < 2:
            raise ValueError("population size u must be >= 2")
        for name in ("elite_fraction", "mutation_rate", "seed_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.s_max < 1 or self.m_max < 1:
            raise ValueError("s_max and m_max must be >= 1")


@dataclass
class EAState:
    population: list
    generation: int = 0
    best: Individual | None = None
    best_objective: float = math.inf
    history: list = field(default_factory=list)


def decode_individual(ind, m_max):
    mats = np.stack([decode_upper(row, m_max) for row in ind.bits])
    return GeneratorMatrixSet(2, mats, "evolved")


def individual_from_matrices(gms, s_max=None, m_max=None):
    """Encode the leading matrices of a binary unit-upper-triangular set."""
    s_max = gms.s if s_max is None else s_max
    m_max = gms.m_max if m_max is None else m_max
    if gms.b != 2:
        raise ValueError("only base-2 generators can seed the search")
    lead = gms.leading(m_max, s_max).matrices
    for C in lead:
        if not (np.all(np.diag(C) == 1) and not np.any(np.tril(C, -1))):
            raise ValueError("seed matrices must be unit upper triangular")
    return Individual(np.stack([encode_upper(C) for C in lead]))


def random_individual(config, gen):
    r = encoding_length(config.m_max)
    return Individual(gen.integers(0, 2, size=(config.s_max, r), dtype=np.uint8))


@lru_cache(maxsize=1 << 16)
def _prefix_t(key, s, m, m_max, t_min):
    bits = np.frombuffer(key, dtype=np.uint8).reshape(s, -1)
    mats = np.stack([decode_upper(row, m_max)[:m, :m] for row in bits])
    return exact_t(GeneratorMatrixSet(2, mats), m, t_min=t_min)


def t_grid(ind, m_max, s_max):
    """Raw t(m, s) of the leading blocks, memoised on the leading-dimension bits."""
    grid = np.zeros((m_max, s_max), dtype=np.int64)
    for m in range(1, m_max + 1):
        lower = 0
        for s in range(1, s_max + 1):
            if s == 1:
                lower = 0  # a nonsingular single generator always has t = 0
            else:
                lower = _prefix_t(ind.bits[:s].tobytes(), s, m, m_max, lower)
            grid[m - 1, s - 1] = lower
    return grid


def objective(ind, m_max, s_max, cumulative=False):
    """Sum over s <= s_max, m <= m_max of t(m, s); cached on the individual."""
    if ind.fitness is None:
        grid = t_grid(ind, m_max, s_max)
        if cumulative:
            grid = np.maximum.accumulate(np.maximum.accumulate(grid, axis=0), axis=1)
        ind.fitness = int(grid.sum())
    return ind.fitness


def crossover_at(p1, p2, cuts):
    """Two-point crossover with explicit 1-based cuts per dimension.

    Child one keeps positions 1..c1 and c2+1..r of ``p1`` and takes c1+1..c2
    from ``p2``; child two is the mirror image.  A ``None`` cut leaves that
    dimension unchanged.
    """
    a, b = p1.bits.copy(), p2.bits.copy()
    for j, cut in enumerate(cuts):
        if cut is None:
            continue
        c1, c2 = cut
        seg = slice(c1, c2)
        a[j, seg], b[j, seg] = p2.bits[j, seg], p1.bits[j, seg]
    return Individual(a), Individual(b)


def crossover(p1, p2, gen):
    """Two-point crossover within each dimension; first cut in the first half, second in the second."""
    if p1.bits.shape != p2.bits.shape:
        raise LengthMismatch("parents have different shapes")
    r = p1.bits.shape[1]
    half = r // 2
    cuts = []
    for _ in range(p1.bits.shape[0]):
        if r < 3:
            cuts.append(None)
            continue
        c1 = int(gen.integers(1, half + 1))
        c2 = int(gen.integers(half + 1, r))
        cuts.append((c1, c2))
    return crossover_at(p1, p2, cuts)


def mutate(ind, rate, gen):
    """Flip exactly ceil(rate * cells) distinct cells chosen across the whole individual."""
    out = Individual(ind.bits.copy())
    total = out.bits.size
    count = min(total, math.ceil(rate * total - 1e-9))
    if count > 0:
        flat = out.bits.reshape(-1)
        pos = gen.choice(total, size=count, replace=False)
        flat[pos] ^= 1
    return out


def _evaluate(pop, config):
    for ind in pop:
        objective(ind, config.m_max, config.s_max, config.cumulative)


def _update_best(state):
    for ind in state.population:
        if ind.fitness < state.best_objective:
            state.best_objective = ind.fitness
            state.best = ind.copy()


def initial_state(config, seed_set=None):
    stream = RngStream(config.seed)
    gen = stream.generator(0, 0)
    pop = []
    if seed_set is not None:
        base = individual_from_matrices(seed_set, config.s_max, config.m_max)
        n_seeded = max(1, round(config.seed_fraction * config.u))
        pop.append(base)
        while len(pop) < n_seeded:
            pop.append(mutate(base, config.mutation_rate, gen))
    while len(pop) < config.u:
        pop.append(random_individual(config, gen))
    state = EAState(pop)
    _evaluate(pop, config)
    _update_best(state)
    state.history.append(state.best_objective)
    return state


def step(state, config):
    """One generation: keep the best fraction, age them out, refill by crossover and mutation."""
    stream = RngStream(config.seed)
    gen_no = state.generation + 1
    pop = state.population
    _evaluate(pop, config)
    order = sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))
    n_elite = max(1, math.ceil(config.elite_fraction * config.u - 1e-9))
    elites = [pop[i] for i in order[:n_elite]]
    survivors = []
    for ind in elites:
        kept = ind.copy()
        kept.age += 1
        if kept.age <= config.max_age:
            survivors.append(kept)
    new_pop = survivors
    child_no = 0
    while len(new_pop) < config.u:
        gen = stream.generator(gen_no, child_no)
        i, k = gen.integers(0, len(elites), size=2)
        if config.crossover:
            c1, c2 = crossover(elites[i], elites[k], gen)
        else:
            c1, c2 = Individual(elites[i].bits.copy()), Individual(elites[k].bits.copy())
        for child in (c1, c2):
            if len(new_pop) < config.u:
                new_pop.append(mutate(child, config.mutation_rate, gen))
        child_no += 1
    _evaluate(new_pop, config)
    out = EAState(new_pop, gen_no, state.best, state.best_objective, list(state.history))
    _update_best(out)
    out.history.append(out.best_objective)
    return out


def run(config, seed_set=None, state=None, checkpoint=None, callback=None):
    """Evolve until max_generations or objective 0; returns (best matrices, history)."""
    state = initial_state(config, seed_set) if state is None else state
    while state.generation < config.max_generations and state.best_objective > 0:
        state = step(state, config)
        if checkpoint is not None:
            save_checkpoint(state, config, checkpoint)
        if callback is not None:
            callback(state)
    return decode_individual(state.best, config.m_max), list(state.history), state


def _hex(bits):
    return [np.packbits(row).tobytes().hex() for row in bits]


def _unhex(rows, r):
    return np.stack([np.unpackbits(np.frombuffer(bytes.fromhex(h), dtype=np.uint8))[:r] for h in rows])


def save_checkpoint(state, config, path):
    r = encoding_length(config.m_max)
    doc = {
        "generation": state.generation,
        "config": asdict(config),
        "population": [_hex(ind.bits) for ind in state.population],
        "fitness": [ind.fitness for ind in state.population],
        "ages": [ind.age for ind in state.population],
        "best": _hex(state.best.bits) if state.best is not None else None,
        "best_objective": state.best_objective,
        "history": state.history,
        "rng": {"algorithm": "PCG64", "seed": config.seed, "next_generation": state.generation + 1},
        "cells_per_dimension": r,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_checkpoint(path):
    doc = json.loads(Path(path).read_text())
    config = EAConfig(**doc["config"])
    r = encoding_length(config.m_max)
    pop = [
        Individual(_unhex(rows, r).astype(np.uint8), fit, age)
        for rows, fit, age in zip(doc["population"], doc["fitness"], doc["ages"])
    ]
    best = Individual(_unhex(doc["best"], r).astype(np.uint8), doc["best_objective"]) if doc["best"] else None
    state = EAState(pop, doc["generation"], best, doc["best_objective"], doc["history"])
    return state, config
