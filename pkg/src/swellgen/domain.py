"""Domain record types, field catalogues, validation and normalization.

The schema is fixed: a sample couples an alloy composition (fractions over
12 elements), 19 thermo-mechanical descriptors D_d, 5 irradiation
conditions D_c, an 8-bin cavity-size histogram H_v, 12 performance
parameters D_r and a 32x32 grayscale micrograph.

All record types are immutable value objects.  Normalization is population
z-scoring fit on a training set; the categorical crystal type expands to a
3-wide one-hot block and the binary C_He field bypasses z-scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ELEMENTS = ("Zr", "Fe", "Cr", "Ni", "Nb", "Mo", "Ti", "Al", "Mg", "Si", "Cu", "O")
CRYSTAL_TYPES = ("bcc", "fcc", "hcp")

MECH_FIELDS = ("E_mod", "nu", "eq_stress", "eq_strain", "n_harden",
               "m_rate", "K_intensity", "lame_lambda", "lame_G")
THERMO_CONT_FIELDS = ("lattice_param", "melting_K", "density",
                      "thermal_expansion", "thermal_conductivity",
                      "heat_capacity", "heat", "seebeck", "resistivity")
DD_CONTINUOUS = MECH_FIELDS + THERMO_CONT_FIELDS          # 18 scalar fields
DD_FIELDS = MECH_FIELDS + ("crystal_type",) + THERMO_CONT_FIELDS  # 19 named

DC_FIELDS = ("phi_fast", "phi_thermal", "phi_flux", "T_irr", "T_exp")

DR_CONTINUOUS = ("delta_s", "delta_b", "delta_e", "delta_L", "H_B", "H_RC",
                 "H_V", "K_v", "K_L", "K_Ic", "delta_t")  # 11 regression targets
DR_FIELDS = DR_CONTINUOUS + ("C_He",)

N_BINS = 8
HIST_CAPACITY = 200
IMAGE_SIZE = 32

# normalized D_d vector: 18 z-scored scalars + 3-wide crystal one-hot
DD_VEC_WIDTH = len(DD_CONTINUOUS) + len(CRYSTAL_TYPES)


# -- deterministic rng derivation --------------------------------------------

# fixed namespace constants keep independent random streams disjoint;
# a stream is identified by (namespace, seed, *indices)
NS_SYNTH = 101
NS_INIT = 202
NS_TRAIN = 303
NS_PRIOR = 404
NS_SERVICE = 505
NS_METRIC = 606


def rng_for(*path: int) -> np.random.Generator:
    """Counter-based stream: same path, same stream, regardless of call order."""
    return np.random.default_rng(list(path))


# -- record types -------------------------------------------------------------


class ValidationError(ValueError):
    """A record violates a domain invariant; message names the field."""


@dataclass(frozen=True)
class MaterialComposition:
    alloy_name: str
    m: tuple[float, ...]  # fractions over ELEMENTS, index-aligned

    def __post_init__(self):
        if len(self.m) != len(ELEMENTS):
            raise ValidationError(f"composition must have {len(ELEMENTS)} fractions, "
                                  f"got {len(self.m)}")
        if any(f < 0 for f in self.m):
            raise ValidationError(f"composition fractions must be nonnegative "
                                  f"({self.alloy_name})")
        total = sum(self.m)
        if not 0.999 <= total <= 1.001:
            raise ValidationError(f"composition of {self.alloy_name!r} sums to "
                                  f"{total:.6f}, outside [0.999, 1.001]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.m, dtype=np.float64)


@dataclass(frozen=True)
class ThermoMechParams:
    E_mod: float
    nu: float
    eq_stress: float
    eq_strain: float
    n_harden: float
    m_rate: float
    K_intensity: float
    lame_lambda: float
    lame_G: float
    crystal_type: str
    lattice_param: float
    melting_K: float
    density: float
    thermal_expansion: float
    thermal_conductivity: float
    heat_capacity: float
    heat: float
    seebeck: float
    resistivity: float

    def __post_init__(self):
        if self.crystal_type not in CRYSTAL_TYPES:
            raise ValidationError(f"crystal_type must be one of {CRYSTAL_TYPES}, "
                                  f"got {self.crystal_type!r}")
        if not self.melting_K > 0:
            raise ValidationError(f"melting_K must be positive, got {self.melting_K}")
        if not self.density > 0:
            raise ValidationError(f"density must be positive, got {self.density}")
        if not 0.0 < self.nu < 0.5:
            raise ValidationError(f"nu must lie in (0, 0.5), got {self.nu}")

    def continuous(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in DD_CONTINUOUS])


@dataclass(frozen=True)
class IrradiationConditions:
    phi_fast: float
    phi_thermal: float
    phi_flux: float
    T_irr: float
    T_exp: float

    def __post_init__(self):
        for name in ("phi_fast", "phi_thermal", "phi_flux"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("T_irr", "T_exp"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in DC_FIELDS])


@dataclass(frozen=True)
class PerformanceParams:
    delta_s: float
    delta_b: float
    delta_e: float
    delta_L: float
    H_B: float
    H_RC: float
    H_V: float
    K_v: float
    K_L: float
    K_Ic: float
    delta_t: float
    C_He: int

    def __post_init__(self):
        for name in DR_CONTINUOUS:
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite, got {getattr(self, name)}")
        if self.C_He not in (0, 1):
            raise ValidationError(f"C_He must be 0 or 1, got {self.C_He}")

    def continuous(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in DR_CONTINUOUS])


@dataclass(frozen=True)
class CavityHistogram:
    counts: tuple[int, ...]  # counts[b-1] = cavities of radius b px, b in 1..8

    def __post_init__(self):
        if len(self.counts) != N_BINS:
            raise ValidationError(f"histogram must have {N_BINS} bins, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValidationError("histogram counts must be nonnegative")
        if any(int(c) != c for c in self.counts):
            raise ValidationError("histogram counts must be integers")
        if sum(self.counts) > HIST_CAPACITY:
            raise ValidationError(f"histogram total {sum(self.counts)} exceeds "
                                  f"renderer capacity {HIST_CAPACITY}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64)

    @property
    def total(self) -> int:
        return int(sum(self.counts))


def validate_micrograph(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (IMAGE_SIZE, IMAGE_SIZE):
        raise ValidationError(f"micrograph must be {IMAGE_SIZE}x{IMAGE_SIZE}, "
                              f"got {image.shape}")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValidationError("micrograph intensities must lie in [0, 1]")
    return image


@dataclass(frozen=True)
class SampleRecord:
    id: str
    composition: MaterialComposition
    d_d: ThermoMechParams
    d_c: IrradiationConditions
    h_v: CavityHistogram
    d_r: PerformanceParams
    micrograph: np.ndarray = field(compare=False)

    def __post_init__(self):
        img = validate_micrograph(self.micrograph)
        img = img.copy()
        img.flags.writeable = False
        object.__setattr__(self, "micrograph", img)


# -- normalization --------------------------------------------------------------


@dataclass(frozen=True)
class BlockStats:
    """Population z-score statistics for one named block of scalar fields."""
    names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray                 # 1.0 where the field had zero variance
    zero_variance: tuple[str, ...]  # flagged pass-through fields

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.std + self.mean


def _fit_block(names: tuple[str, ...], columns: np.ndarray) -> BlockStats:
    """columns: (n_samples, n_fields).  Column order independence is exact
    because each column is sorted before the moment sums are taken."""
    ordered = np.sort(columns, axis=0)
    mean = ordered.mean(axis=0)
    std = np.sqrt(((ordered - mean) ** 2).mean(axis=0))
    flagged = tuple(names[i] for i in np.flatnonzero(std == 0.0))
    std = np.where(std == 0.0, 1.0, std)
    return BlockStats(names=names, mean=mean, std=std, zero_variance=flagged)


@dataclass(frozen=True)
class DatasetStats:
    d_d: BlockStats
    d_c: BlockStats
    d_r: BlockStats
    h_v: BlockStats

    def to_arrays(self) -> dict[str, np.ndarray]:
        out = {}
        for block_name in ("d_d", "d_c", "d_r", "h_v"):
            block: BlockStats = getattr(self, block_name)
            out[f"stats/{block_name}/mean"] = block.mean
            out[f"stats/{block_name}/std"] = block.std
            flags = np.array([1.0 if n in block.zero_variance else 0.0
                              for n in block.names])
            out[f"stats/{block_name}/zero_variance"] = flags
        return out

    @staticmethod
    def from_arrays(arrays: dict[str, np.ndarray]) -> "DatasetStats":
        blocks = {}
        for block_name, names in (("d_d", DD_CONTINUOUS), ("d_c", DC_FIELDS),
                                  ("d_r", DR_CONTINUOUS),
                                  ("h_v", tuple(f"bin{i}" for i in range(1, N_BINS + 1)))):
            flags = arrays[f"stats/{block_name}/zero_variance"]
            blocks[block_name] = BlockStats(
                names=names,
                mean=arrays[f"stats/{block_name}/mean"].copy(),
                std=arrays[f"stats/{block_name}/std"].copy(),
                zero_variance=tuple(n for n, f in zip(names, flags) if f > 0.5),
            )
        return DatasetStats(**blocks)


def fit_stats(samples) -> DatasetStats:
    """Population z-score statistics over a sample list (needs >= 2 samples)."""
    if len(samples) < 2:
        raise ValidationError(f"fit_stats needs at least 2 samples, got {len(samples)}")
    dd = np.stack([s.d_d.continuous() for s in samples])
    dc = np.stack([s.d_c.as_array() for s in samples])
    dr = np.stack([s.d_r.continuous() for s in samples])
    hv = np.stack([s.h_v.as_array() for s in samples])
    return DatasetStats(
        d_d=_fit_block(DD_CONTINUOUS, dd),
        d_c=_fit_block(DC_FIELDS, dc),
        d_r=_fit_block(DR_CONTINUOUS, dr),
        h_v=_fit_block(tuple(f"bin{i}" for i in range(1, N_BINS + 1)), hv),
    )


def crystal_one_hot(crystal_type: str) -> np.ndarray:
    out = np.zeros(len(CRYSTAL_TYPES))
    out[CRYSTAL_TYPES.index(crystal_type)] = 1.0
    return out


def dd_vector(d_d: ThermoMechParams, stats: DatasetStats) -> np.ndarray:
    """21-wide network input: z-scored scalars then crystal one-hot."""
    return np.concatenate([stats.d_d.normalize(d_d.continuous()),
                           crystal_one_hot(d_d.crystal_type)])


def dc_vector(d_c: IrradiationConditions, stats: DatasetStats) -> np.ndarray:
    return stats.d_c.normalize(d_c.as_array())


def dr_vector(d_r: PerformanceParams, stats: DatasetStats) -> np.ndarray:
    """11 z-scored continuous targets; C_He rides separately as a binary label."""
    return stats.d_r.normalize(d_r.continuous())


def hv_vector(h_v: CavityHistogram, stats: DatasetStats) -> np.ndarray:
    return stats.h_v.normalize(h_v.as_array())


def normalize(stats: DatasetStats, record: SampleRecord) -> dict[str, np.ndarray]:
    return {
        "d_d": dd_vector(record.d_d, stats),
        "d_c": dc_vector(record.d_c, stats),
        "d_r": dr_vector(record.d_r, stats),
        "h_v": hv_vector(record.h_v, stats),
        "c_he": np.array(float(record.d_r.C_He)),
    }


def denormalized_dr(vec: np.ndarray, c_he: int, stats: DatasetStats) -> PerformanceParams:
    raw = stats.d_r.denormalize(vec)
    kwargs = dict(zip(DR_CONTINUOUS, (float(v) for v in raw)))
    return PerformanceParams(C_He=int(c_he), **kwargs)


# -- plot-data export -------------------------------------------------------------


def export_histogram_plot_data(h_v: CavityHistogram) -> str:
    """Bin/count CSV rows for external plotting tools."""
    lines = ["bin,count"]
    for b, count in enumerate(h_v.counts, start=1):
        lines.append(f"{b},{int(count)}")
    return "\n".join(lines) + "\n"
