"""Grammar-based random constraint generation for differential testing.

The sampled language is the date/period fragment only: free date
variables, date literals, period literals with scaling and addition,
date-plus-period arithmetic, date comparisons, and boolean connectives.
No integer or boolean variables, and no field selectors — stressing the
encoding strategies without confounding the instances with plain LIA.

Shape is controlled by `SamplerConfig`: production weights are scaled by
`depth_decay ** depth` for recursive rules, so trees thin out as they
deepen; terminals keep their base weight. Date literals are drawn
uniformly (by day offset) from a configured window, so every generated
constructor is a real calendar date. Generation is deterministic per
seed: text is produced first, then parsed, so a sampled problem is also
a parser round-trip by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

from .gregorian import Date, from_epoch_days, to_epoch_days
from .parser import problem_from_dict
from .syntax import CMP_OPS, Problem

DEFAULT_WEIGHTS: Mapping[str, float] = {
    # boolean layer
    "cmp": 3.0, "and": 1.0, "or": 1.0, "not": 0.5,
    # date layer
    "var": 3.0, "date_lit": 1.0, "date_add": 1.5, "date_sub": 0.5,
    # period layer
    "period_lit": 2.0, "scale": 1.0, "period_add": 0.5, "period_sub": 0.5,
}


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    max_depth: int = 4
    n_date_vars: int = 10  # draw variables from D1..Dn
    n_atoms: int = 3  # constraints per problem
    depth_decay: float = 0.7
    weights: Mapping[str, float] = field(default_factory=lambda: DEFAULT_WEIGHTS)
    max_years: int = 9
    max_months: int = 11
    max_days: int = 40
    max_scale: int = 3
    date_lo: Date = Date(1950, 1, 1)
    date_hi: Date = Date(2049, 12, 31)


class _Sampler:
    def __init__(self, cfg: SamplerConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.used: set[str] = set()
        self._lo = to_epoch_days(cfg.date_lo)
        self._hi = to_epoch_days(cfg.date_hi)

    def pick(self, depth: int, rules: dict[str, bool]) -> str:
        """Weighted choice; recursive rules decay with depth and are
        disabled entirely at max_depth."""
        cfg = self.cfg
        names, weights = [], []
        for name, recursive in rules.items():
            w = cfg.weights.get(name, 0.0)
            if recursive:
                if depth >= cfg.max_depth:
                    continue
                w *= cfg.depth_decay ** depth
            if w > 0:
                names.append(name)
                weights.append(w)
        return self.rng.choices(names, weights)[0]

    # -- terminals --
    def date_var(self) -> str:
        name = f"D{self.rng.randint(1, self.cfg.n_date_vars)}"
        self.used.add(name)
        return name

    def date_lit(self) -> str:
        d = from_epoch_days(self.rng.randint(self._lo, self._hi))
        return f"Date({d.year}, {d.month}, {d.day})"

    def period_lit(self) -> str:
        rng, cfg = self.rng, self.cfg
        y = rng.randint(-cfg.max_years, cfg.max_years)
        m = rng.randint(-cfg.max_months, cfg.max_months)
        d = rng.randint(-cfg.max_days, cfg.max_days)
        return f"Period({y}, {m}, {d})"

    # -- productions --
    def period(self, depth: int) -> str:
        rule = self.pick(depth, {"period_lit": False, "scale": True,
                                 "period_add": True, "period_sub": True})
        if rule == "period_lit":
            return self.period_lit()
        if rule == "scale":
            k = self.rng.choice([n for n in range(-self.cfg.max_scale,
                                                  self.cfg.max_scale + 1) if n])
            return f"({self.period(depth + 1)} * {k})"
        op = "+" if rule == "period_add" else "-"
        return f"({self.period(depth + 1)} {op} {self.period(depth + 1)})"

    def date(self, depth: int) -> str:
        rule = self.pick(depth, {"var": False, "date_lit": False,
                                 "date_add": True, "date_sub": True})
        if rule == "var":
            return self.date_var()
        if rule == "date_lit":
            return self.date_lit()
        op = "+" if rule == "date_add" else "-"
        return f"({self.date(depth + 1)} {op} {self.period(depth + 1)})"

    def atom(self, depth: int) -> str:
        rule = self.pick(depth, {"cmp": False, "and": True, "or": True,
                                 "not": True})
        if rule == "cmp":
            op = self.rng.choice(CMP_OPS)
            return f"{self.date(depth + 1)} {op} {self.date(depth + 1)}"
        if rule == "not":
            return f"!({self.atom(depth + 1)})"
        op = "&&" if rule == "and" else "||"
        return f"({self.atom(depth + 1)}) {op} ({self.atom(depth + 1)})"

    def problem(self) -> Problem:
        atoms = [self.atom(0) for _ in range(self.cfg.n_atoms)]
        decls = [f"{name}: date"
                 for name in sorted(self.used, key=lambda n: int(n[1:]))]
        return problem_from_dict({
            "name": f"sampled-{self.cfg.seed}",
            "description": f"grammar-sampled constraint, seed {self.cfg.seed}",
            "declarations": decls,
            "constraints": atoms,
            "coverage_tags": ["grammar_sampled"],
        })


def sample_problem(cfg: SamplerConfig) -> Problem:
    """One random well-formed problem; byte-identical for equal configs."""
    return _Sampler(cfg).problem()


def sample_problems(cfg: SamplerConfig, count: int) -> Iterator[Problem]:
    """A stream of problems seeded seed, seed+1, ... seed+count-1."""
    for i in range(count):
        yield sample_problem(replace(cfg, seed=cfg.seed + i))
