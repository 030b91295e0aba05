"""Exhaustive checks of the combinatorial lemmas behind the moment expansion.

Each suite takes an upper size bound ``m`` and checks every applicable
size up to it, returning a :class:`SuiteResult`.  The CLI and the test
suite share these.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .partitions import (
    SetPartition,
    bell,
    catalan,
    d_map,
    enumerate_all,
    enumerate_class,
    has_property_p,
    kreweras,
    restrict,
)

__all__ = ["SuiteResult", "SUITES", "DEFAULT_SIZES", "run_suite"]


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checked: int = 0
    failures: list = field(default_factory=list)

    def fail(self, what) -> None:
        self.passed = False
        if len(self.failures) < 10:
            self.failures.append(what)

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        tail = f" first failure: {self.failures[0]}" if self.failures else ""
        return f"{self.name}: {status} ({self.checked} cases){tail}"


def _suite_counts(m: int) -> SuiteResult:
    res = SuiteResult("counts")
    for size in range(1, m + 1):
        checks = [
            (len(enumerate_class(size, "all")), bell(size)),
            (len(enumerate_class(size, "noncrossing")), catalan(size)),
            (len(enumerate_class(size, "nc_pair")), catalan(size // 2) if size % 2 == 0 else 0),
        ]
        for got, want in checks:
            res.checked += 1
            if got != want:
                res.fail((size, got, want))
    return res


def _suite_ok_bijection(m: int) -> SuiteResult:
    res = SuiteResult("ok-bijection")
    for size in range(1, m + 1):
        closed_nc = set(enumerate_class(size + 1, "closed_nc"))
        images = set()
        for pi in enumerate_class(size, "noncrossing"):
            sigma = kreweras(pi, "OK")
            res.checked += 1
            if sigma not in closed_nc or kreweras(sigma, "IK") != pi:
                res.fail(str(pi))
            images.add(sigma)
        if images != closed_nc:
            res.fail(f"OK is not onto for m={size}")
    return res


def _suite_remove_1(m: int) -> SuiteResult:
    res = SuiteResult("remove-1")
    for size in range(2, m + 1):
        ground = size + 1
        for sigma in enumerate_all(ground):
            d = d_map(sigma)
            for p in range(2, ground):
                if not (sigma.block_of(p) == (p,) and sigma.same_block(p - 1, p + 1)):
                    continue
                res.checked += 1
                rest = [x for x in range(1, ground + 1) if x not in (p, p + 1)]
                if len(sigma) != len(restrict(sigma, rest)) + 1 or d.block_of(p - 1) != (p - 1, p):
                    res.fail((str(sigma), p))
    return res


def _suite_restriction_p(m: int) -> SuiteResult:
    res = SuiteResult("restriction-p")
    for size in range(2, m + 1):
        ground = size + 1
        for sigma in enumerate_class(ground, "closed"):
            if not has_property_p(sigma):
                continue
            for (p,) in (b for b in sigma.blocks if len(b) == 1):
                res.checked += 1
                rest = [x for x in range(1, ground + 1) if x not in (p, p + 1)]
                ok = 1 < p < ground and sigma.same_block(p - 1, p + 1)
                sub = restrict(sigma, rest)
                ok = ok and (sub.ground_size < 2 or has_property_p(sub))
                if not ok:
                    res.fail((str(sigma), p))
    return res


def _suite_odd_length(m: int) -> SuiteResult:
    res = SuiteResult("odd-length")
    for size in range(3, m + 1, 2):
        for sigma in enumerate_class(size + 1, "closed"):
            if has_property_p(sigma):
                res.checked += 1
                if len(sigma) > (size + 1) // 2:
                    res.fail(str(sigma))
    return res


def _suite_even_length(m: int) -> SuiteResult:
    res = SuiteResult("even-length")
    for size in range(2, m + 1, 2):
        ok_images = {kreweras(pi, "OK") for pi in enumerate_class(size, "nc_pair")}
        for sigma in enumerate_class(size + 1, "closed"):
            if not has_property_p(sigma):
                continue
            res.checked += 1
            bound = size // 2 + 1
            if len(sigma) > bound or ((len(sigma) == bound) != (sigma in ok_images)):
                res.fail(str(sigma))
        # every OK(pi) must itself appear among the maximal property-P kernels
        for sigma in ok_images:
            res.checked += 1
            if not has_property_p(sigma) or len(sigma) != size // 2 + 1:
                res.fail(f"OK image {sigma}")
    return res


def _suite_single_block(m: int) -> SuiteResult:
    res = SuiteResult("single-block")
    for size in range(2, m + 1, 2):
        for pi in enumerate_class(size, "nc_pair"):
            res.checked += 1
            if not any(len(b) == 1 for b in kreweras(pi, "OK").blocks):
                res.fail(str(pi))
    return res


def _suite_inside_ok(m: int) -> SuiteResult:
    res = SuiteResult("inside-ok")
    for size in range(2, m + 1, 2):
        for pi in enumerate_class(size, "nc_pair"):
            sigma = kreweras(pi, "OK")
            for p, q in pi.blocks:
                res.checked += 1
                rhs = restrict(sigma, range(p + 1, q + 1))
                if q == p + 1:
                    lhs = SetPartition([[1]], 1)
                else:
                    lhs = kreweras(restrict(pi, range(p + 1, q)), "OK")
                if lhs != rhs:
                    res.fail((str(pi), (p, q)))
    return res


def _suite_anti_oriented(m: int) -> SuiteResult:
    res = SuiteResult("anti-oriented")
    for size in range(2, m + 1, 2):
        for pi in enumerate_class(size, "nc_pair"):
            sigma = kreweras(pi, "OK")
            for p, q in pi.blocks:
                res.checked += 1
                if not (sigma.same_block(p, q + 1) and sigma.same_block(p + 1, q)):
                    res.fail((str(pi), (p, q)))
    return res


def _suite_closure(m: int) -> SuiteResult:
    """Flags closed kernels where the d-map needed transitive closure."""
    res = SuiteResult("d-closure")
    for size in range(2, m + 1):
        for sigma in enumerate_class(size + 1, "closed"):
            res.checked += 1
            _, added = d_map(sigma, report_closure=True)
            if added:
                res.fail(str(sigma))
    return res


SUITES: dict[str, Callable[[int], SuiteResult]] = {
    "counts": _suite_counts,
    "ok-bijection": _suite_ok_bijection,
    "remove-1": _suite_remove_1,
    "restriction-p": _suite_restriction_p,
    "odd-length": _suite_odd_length,
    "even-length": _suite_even_length,
    "single-block": _suite_single_block,
    "inside-ok": _suite_inside_ok,
    "anti-oriented": _suite_anti_oriented,
    "d-closure": _suite_closure,
}

# sizes at which each suite is run exhaustively by the acceptance gate
DEFAULT_SIZES = {
    "counts": 10,
    "ok-bijection": 8,
    "remove-1": 7,
    "restriction-p": 7,
    "odd-length": 7,
    "even-length": 8,
    "single-block": 8,
    "inside-ok": 8,
    "anti-oriented": 8,
    "d-closure": 7,
}


def run_suite(name: str, m: int | None = None) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}") from None
    return fn(DEFAULT_SIZES[name] if m is None else m)
