"""Procedural ground-truth physics: swelling intensity, cavity histograms,
micrograph rendering and the performance oracle.

Every constant lives in ORACLE_CONSTANTS and is folded into a version hash
written to dataset manifests, so any change to the physics is visible as a
new dataset version.  All functions are pure and all randomness is
counter-based: sample i of a run with seed s derives its generator from
(namespace, s, i), which makes parallel and serial generation identical.

Renderer geometry: a cavity of bin radius b paints interior pixels
(squared distance <= (b-1)^2) at 0.2 and a one-pixel rim
((b-1)^2 < d^2 <= b^2) at 0.5 over an N(0.8, 0.05) background.  Interior
pixel counts per bin (1, 5, 13, 29, 49, 81, 113, 149) are pairwise
distinct, so connected-component analysis below the 0.35 threshold
recovers the exact histogram for non-overlapping placements.
"""

from __future__ import annotations

import math

import numpy as np

from .bundle import config_hash
from .domain import (CavityHistogram, DD_CONTINUOUS, ELEMENTS, IMAGE_SIZE,
                     IrradiationConditions, MaterialComposition, N_BINS,
                     NS_SYNTH, PerformanceParams, SampleRecord,
                     ThermoMechParams, ValidationError, rng_for)
from .materials import ALLOY_NAMES, composition, nominal_dd

# susceptibility weights per element; zero when unlisted
_SUSCEPTIBILITY = {"Zr": 0.8, "Fe": 0.4, "Ni": 0.2, "Cr": 0.1}

# per-field performance coefficients: base value from one descriptor field,
# a swelling slope kappa and a temperature slope tau.  Hardening fields
# (delta_s, H_B, H_RC, H_V) rise with swelling, ductility fields
# (delta_e, delta_L, K_Ic, delta_t) fall.  K_v and K_L are direct
# percentage readouts of the cavity volume fraction.
_PERF_TABLE = {
    #            base field      base scale  kappa   tau
    "delta_s": ("E_mod",        0.0016,     +0.90,  -0.05),
    "delta_b": ("E_mod",        0.0022,     +0.50,  -0.04),
    "delta_e": ("E_mod",        0.0010,     -0.50,  -0.03),
    "delta_L": ("n_harden",     40.0,       -0.70,  +0.06),
    "H_B":     ("density",      30.0,       +0.80,  -0.05),
    "H_RC":    ("density",      3.2,        +0.70,  -0.05),
    "H_V":     ("eq_stress",    0.55,       +0.85,  -0.04),
    "K_Ic":    ("K_intensity",  1.5,        -0.60,  +0.05),
    "delta_t": ("eq_stress",    0.12,       -0.55,  -0.06),
}

ORACLE_CONSTANTS = {
    "Phi_ref": 10.0,
    "T_a": 600.0,
    "alpha": 0.3,
    "susceptibility": _SUSCEPTIBILITY,
    "N_max": 40,
    "sigma_r": 1.2,
    "C_He_threshold": 0.15,
    "K_v_scale": 100.0,
    "K_L_scale": 30.0,
    "perf_table": {k: list(v) for k, v in _PERF_TABLE.items()},
    "render": {"background_mean": 0.8, "background_std": 0.05,
               "interior": 0.2, "rim": 0.5, "max_retries": 50,
               "detect_threshold": 0.35},
    "sampling": {"phi_range": [0.0, 30.0], "T_irr_range": [400.0, 1100.0],
                 "T_exp_range": [300.0, 800.0], "dd_jitter": 0.05},
}

DATASET_VERSION = config_hash(ORACLE_CONSTANTS)[:16]

# interior pixel count for each bin radius (Gauss circle counts)
_INTERIOR_COUNTS = {}
for _b in range(1, N_BINS + 1):
    _r2 = (_b - 1) ** 2
    _span = np.arange(-N_BINS, N_BINS + 1)
    _d2 = _span[:, None] ** 2 + _span[None, :] ** 2
    _INTERIOR_COUNTS[_b] = int((_d2 <= _r2).sum())
_RADIUS_BY_PIXELS = {v: k for k, v in _INTERIOR_COUNTS.items()}


# -- physics ------------------------------------------------------------------


def susceptibility(m: MaterialComposition) -> float:
    weights = np.array([_SUSCEPTIBILITY.get(sym, 0.0) for sym in ELEMENTS])
    return float(m.as_array() @ weights)


def swelling_intensity(m: MaterialComposition, d_c: IrradiationConditions) -> float:
    if d_c.T_irr <= 0:
        raise ValidationError(f"T_irr must be positive, got {d_c.T_irr}")
    raw = ((d_c.phi_flux / ORACLE_CONSTANTS["Phi_ref"])
           * math.exp(-ORACLE_CONSTANTS["T_a"] / d_c.T_irr)
           * (1.0 + ORACLE_CONSTANTS["alpha"] * susceptibility(m)))
    return float(min(1.0, max(0.0, raw)))


def cavity_histogram(s: float) -> CavityHistogram:
    """Cavity counts per radius bin for swelling intensity s in [0, 1].

    Cavity total N = round(N_max*s), distributed over bins by a discretized
    Gaussian centered at mu_r = 1 + 5s with width sigma_r.  Bin counts are
    rounded by largest-remainder apportionment (floor everything, then hand
    the leftover counts to the largest fractional parts, ties to the lower
    bin), which keeps every count within one of N*p_b and the total exactly
    N.  Independent per-bin rounding can drift the total by up to 4, which
    would break the documented slack bound.
    """
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"swelling intensity must lie in [0, 1], got {s}")
    n = int(np.floor(ORACLE_CONSTANTS["N_max"] * s + 0.5))
    if n == 0:
        return CavityHistogram(counts=(0,) * N_BINS)
    mu_r = 1.0 + 5.0 * s
    bins = np.arange(1, N_BINS + 1, dtype=np.float64)
    p = np.exp(-((bins - mu_r) ** 2) / (2.0 * ORACLE_CONSTANTS["sigma_r"] ** 2))
    p /= p.sum()
    ideal = n * p
    counts = np.floor(ideal).astype(int)
    leftover = n - int(counts.sum())
    if leftover > 0:
        frac = ideal - np.floor(ideal)
        order = np.lexsort((np.arange(N_BINS), -frac))
        counts[order[:leftover]] += 1
    return CavityHistogram(counts=tuple(int(c) for c in counts))


def cavity_volume_fraction(h_v: CavityHistogram) -> float:
    bins = np.arange(1, N_BINS + 1, dtype=np.float64)
    area = float((h_v.as_array() * np.pi * bins ** 2).sum())
    return min(1.0, area / (IMAGE_SIZE * IMAGE_SIZE))


def performance_oracle(h_v: CavityHistogram, d_d: ThermoMechParams,
                       d_c: IrradiationConditions) -> PerformanceParams:
    v_frac = cavity_volume_fraction(h_v)
    t_f = (d_c.T_irr - 300.0) / 1000.0
    values = {}
    for name, (base_field, scale, kappa, tau) in _PERF_TABLE.items():
        base = scale * getattr(d_d, base_field)
        values[name] = base * (1.0 + kappa * v_frac + tau * t_f)
    values["K_v"] = ORACLE_CONSTANTS["K_v_scale"] * v_frac
    values["K_L"] = ORACLE_CONSTANTS["K_L_scale"] * v_frac
    values["C_He"] = int(v_frac > ORACLE_CONSTANTS["C_He_threshold"])
    return PerformanceParams(**values)


# -- renderer ------------------------------------------------------------------


def render_micrograph(h_v: CavityHistogram, seed) -> np.ndarray:
    """Deterministic 32x32 rendering of a cavity histogram.

    Disks are placed largest-first at integer centers drawn uniformly from
    the fully-inside range; a candidate overlapping an accepted disk
    (center distance < r1 + r2 + 1) is redrawn up to 50 times, then the
    last candidate is accepted.  Rims paint before interiors so interiors
    are never overwritten.  Output is quantized to the 1/255 grid.
    """
    render = ORACLE_CONSTANTS["render"]
    rng = np.random.default_rng(seed)
    image = rng.normal(render["background_mean"], render["background_std"],
                       size=(IMAGE_SIZE, IMAGE_SIZE)).clip(0.0, 1.0)

    placed: list[tuple[int, int, int]] = []
    for b in range(N_BINS, 0, -1):
        for _ in range(h_v.counts[b - 1]):
            lo, hi = b, IMAGE_SIZE - 1 - b
            cy = cx = None
            for _attempt in range(render["max_retries"]):
                candidate = rng.integers(lo, hi + 1, size=2)
                cy, cx = int(candidate[0]), int(candidate[1])
                if all((cy - py) ** 2 + (cx - px) ** 2 >= (b + pb + 1) ** 2
                       for py, px, pb in placed):
                    break
            placed.append((cy, cx, b))

    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE]
    rim_mask = np.zeros_like(image, dtype=bool)
    interior_mask = np.zeros_like(image, dtype=bool)
    for cy, cx, b in placed:
        d2 = (yy - cy) ** 2 + (xx - cx) ** 2
        interior_mask |= d2 <= (b - 1) ** 2
        rim_mask |= (d2 > (b - 1) ** 2) & (d2 <= b * b)
    image[rim_mask] = render["rim"]
    image[interior_mask] = render["interior"]
    return np.rint(image * 255.0) / 255.0


def detect_cavities(image: np.ndarray, threshold: float | None = None):
    """Recover per-bin cavity counts by connected-component analysis.

    Returns (counts, unmatched_sizes): component pixel counts that match a
    bin's interior size increment that bin; any other size is reported in
    unmatched_sizes (overlapping or clipped cavities).
    """
    if threshold is None:
        threshold = ORACLE_CONSTANTS["render"]["detect_threshold"]
    mask = np.asarray(image) < threshold
    visited = np.zeros_like(mask, dtype=bool)
    counts = [0] * N_BINS
    unmatched: list[int] = []
    for sy, sx in zip(*np.nonzero(mask)):
        if visited[sy, sx]:
            continue
        stack = [(int(sy), int(sx))]
        visited[sy, sx] = True
        size = 0
        while stack:
            y, x = stack.pop()
            size += 1
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    ny, nx = y + dy, x + dx
                    if (0 <= ny < IMAGE_SIZE and 0 <= nx < IMAGE_SIZE
                            and mask[ny, nx] and not visited[ny, nx]):
                        visited[ny, nx] = True
                        stack.append((ny, nx))
        radius = _RADIUS_BY_PIXELS.get(size)
        if radius is None:
            unmatched.append(size)
        else:
            counts[radius - 1] += 1
    return tuple(counts), unmatched


# -- dataset generation --------------------------------------------------------


def generate_sample(index: int, seed: int) -> SampleRecord:
    """Sample ``index`` of the dataset stream for ``seed``; order-free."""
    alloy = ALLOY_NAMES[index % len(ALLOY_NAMES)]
    comp = composition(alloy)
    nominal = nominal_dd(alloy)
    rng = rng_for(NS_SYNTH, seed, index)

    sampling = ORACLE_CONSTANTS["sampling"]
    jitter = rng.uniform(-sampling["dd_jitter"], sampling["dd_jitter"],
                         size=len(DD_CONTINUOUS))
    dd_kwargs = {"crystal_type": nominal.crystal_type}
    for name, j in zip(DD_CONTINUOUS, jitter):
        dd_kwargs[name] = getattr(nominal, name) * (1.0 + j)
    d_d = ThermoMechParams(**dd_kwargs)

    phi = rng.uniform(*sampling["phi_range"], size=3)
    d_c = IrradiationConditions(
        phi_fast=float(phi[0]), phi_thermal=float(phi[1]), phi_flux=float(phi[2]),
        T_irr=float(rng.uniform(*sampling["T_irr_range"])),
        T_exp=float(rng.uniform(*sampling["T_exp_range"])),
    )

    s = swelling_intensity(comp, d_c)
    h_v = cavity_histogram(s)
    micrograph = render_micrograph(h_v, seed=[NS_SYNTH, seed, index, 1])
    d_r = performance_oracle(h_v, d_d, d_c)
    return SampleRecord(id=f"s{index:06d}", composition=comp, d_d=d_d,
                        d_c=d_c, h_v=h_v, d_r=d_r, micrograph=micrograph)


def generate_dataset(n: int, seed: int) -> list[SampleRecord]:
    if n <= 0:
        raise ValidationError(f"dataset size must be positive, got {n}")
    return [generate_sample(i, seed) for i in range(n)]
