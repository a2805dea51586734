"""Fixed nominal table for the 14 alloys: compositions and descriptor values.

Compositions are approximate nominal element fractions (each row sums to
1.0 up to float rounding) and descriptor values are plausible
handbook-style nominals;
both are frozen artifact constants that the synthetic dataset builds on,
not measured data.  Lame coefficients are derived from (E, nu) so the
mechanical block stays self-consistent.
"""

from __future__ import annotations

from .domain import ELEMENTS, MaterialComposition, ThermoMechParams

ALLOY_NAMES = (
    "Inconel718", "InconeX750", "Zr1", "Zr2", "Zr4", "Zr1Nb", "Zr2.5Nb",
    "1Cr13", "2Cr13", "00Cr13Ni5Mo4", "Au304", "Au317", "Cr17Ti", "Cr25",
)

# element fractions by symbol; omitted elements are zero
_COMPOSITIONS: dict[str, dict[str, float]] = {
    "Inconel718":   {"Ni": 0.525, "Cr": 0.19, "Fe": 0.185, "Nb": 0.051,
                     "Mo": 0.030, "Ti": 0.009, "Al": 0.005, "Si": 0.003, "Cu": 0.002},
    "InconeX750":   {"Ni": 0.730, "Cr": 0.155, "Fe": 0.070, "Ti": 0.025,
                     "Nb": 0.010, "Al": 0.007, "Si": 0.002, "Cu": 0.001},
    "Zr1":          {"Zr": 0.985, "Fe": 0.002, "Cr": 0.001, "O": 0.012},
    "Zr2":          {"Zr": 0.9845, "Fe": 0.0015, "Cr": 0.001, "Ni": 0.0005, "O": 0.0125},
    "Zr4":          {"Zr": 0.9833, "Fe": 0.0022, "Cr": 0.0012, "O": 0.0133},
    "Zr1Nb":        {"Zr": 0.978, "Nb": 0.010, "Fe": 0.0005, "O": 0.0115},
    "Zr2.5Nb":      {"Zr": 0.961, "Nb": 0.0255, "Fe": 0.001, "O": 0.0125},
    "1Cr13":        {"Fe": 0.853, "Cr": 0.125, "Si": 0.008, "Ni": 0.005,
                     "Cu": 0.003, "Mo": 0.002, "Ti": 0.001, "O": 0.003},
    "2Cr13":        {"Fe": 0.843, "Cr": 0.135, "Si": 0.008, "Ni": 0.006,
                     "Cu": 0.003, "Mo": 0.002, "Ti": 0.001, "O": 0.002},
    "00Cr13Ni5Mo4": {"Fe": 0.766, "Cr": 0.130, "Ni": 0.050, "Mo": 0.040,
                     "Si": 0.007, "Cu": 0.004, "Ti": 0.001, "O": 0.002},
    "Au304":        {"Fe": 0.705, "Cr": 0.190, "Ni": 0.090, "Si": 0.007,
                     "Cu": 0.004, "Mo": 0.002, "Ti": 0.001, "O": 0.001},
    "Au317":        {"Fe": 0.643, "Cr": 0.190, "Ni": 0.130, "Mo": 0.030, "Si": 0.007},
    "Cr17Ti":       {"Fe": 0.801, "Cr": 0.175, "Ti": 0.006, "Si": 0.008,
                     "Ni": 0.005, "Cu": 0.003, "O": 0.002},
    "Cr25":         {"Fe": 0.728, "Cr": 0.255, "Si": 0.008, "Ni": 0.005,
                     "Cu": 0.002, "Ti": 0.001, "O": 0.001},
}

# E_mod MPa, eq_stress MPa, K_intensity MPa*sqrt(m), lattice nm, melting K,
# density g/cm3, expansion 1e-6/K, conductivity W/(m K), capacity J/(g K),
# heat KJ/mol, seebeck uV/K, resistivity 1e-8 ohm*m
_NOMINALS: dict[str, dict] = {
    "Inconel718":   dict(E_mod=205000.0, nu=0.29, eq_stress=1030.0, eq_strain=0.12,
                         n_harden=0.08, m_rate=0.006, K_intensity=110.0,
                         crystal_type="fcc", lattice_param=0.356, melting_K=1609.0,
                         density=8.19, thermal_expansion=13.0,
                         thermal_conductivity=11.4, heat_capacity=0.435,
                         heat=17.0, seebeck=-1.5, resistivity=125.0),
    "InconeX750":   dict(E_mod=214000.0, nu=0.30, eq_stress=815.0, eq_strain=0.15,
                         n_harden=0.09, m_rate=0.007, K_intensity=100.0,
                         crystal_type="fcc", lattice_param=0.357, melting_K=1666.0,
                         density=8.28, thermal_expansion=12.6,
                         thermal_conductivity=12.0, heat_capacity=0.431,
                         heat=17.5, seebeck=-1.4, resistivity=122.0),
    "Zr1":          dict(E_mod=99000.0, nu=0.34, eq_stress=280.0, eq_strain=0.32,
                         n_harden=0.10, m_rate=0.015, K_intensity=45.0,
                         crystal_type="hcp", lattice_param=0.323, melting_K=2125.0,
                         density=6.55, thermal_expansion=6.0,
                         thermal_conductivity=21.5, heat_capacity=0.285,
                         heat=41.0, seebeck=8.9, resistivity=45.0),
    "Zr2":          dict(E_mod=99300.0, nu=0.34, eq_stress=350.0, eq_strain=0.28,
                         n_harden=0.11, m_rate=0.014, K_intensity=48.0,
                         crystal_type="hcp", lattice_param=0.323, melting_K=2123.0,
                         density=6.56, thermal_expansion=6.0,
                         thermal_conductivity=21.4, heat_capacity=0.285,
                         heat=41.0, seebeck=8.8, resistivity=47.0),
    "Zr4":          dict(E_mod=99500.0, nu=0.34, eq_stress=380.0, eq_strain=0.27,
                         n_harden=0.12, m_rate=0.013, K_intensity=50.0,
                         crystal_type="hcp", lattice_param=0.323, melting_K=2122.0,
                         density=6.56, thermal_expansion=6.1,
                         thermal_conductivity=21.3, heat_capacity=0.286,
                         heat=41.0, seebeck=8.8, resistivity=48.0),
    "Zr1Nb":        dict(E_mod=98500.0, nu=0.34, eq_stress=400.0, eq_strain=0.26,
                         n_harden=0.12, m_rate=0.012, K_intensity=52.0,
                         crystal_type="hcp", lattice_param=0.324, melting_K=2120.0,
                         density=6.57, thermal_expansion=6.1,
                         thermal_conductivity=20.9, heat_capacity=0.287,
                         heat=40.8, seebeck=8.6, resistivity=50.0),
    "Zr2.5Nb":      dict(E_mod=97800.0, nu=0.34, eq_stress=450.0, eq_strain=0.24,
                         n_harden=0.13, m_rate=0.012, K_intensity=55.0,
                         crystal_type="hcp", lattice_param=0.324, melting_K=2115.0,
                         density=6.59, thermal_expansion=6.2,
                         thermal_conductivity=20.2, heat_capacity=0.288,
                         heat=40.5, seebeck=8.4, resistivity=53.0),
    "1Cr13":        dict(E_mod=200000.0, nu=0.285, eq_stress=440.0, eq_strain=0.20,
                         n_harden=0.15, m_rate=0.010, K_intensity=60.0,
                         crystal_type="bcc", lattice_param=0.287, melting_K=1780.0,
                         density=7.75, thermal_expansion=10.5,
                         thermal_conductivity=25.0, heat_capacity=0.460,
                         heat=13.8, seebeck=3.0, resistivity=55.0),
    "2Cr13":        dict(E_mod=206000.0, nu=0.285, eq_stress=510.0, eq_strain=0.18,
                         n_harden=0.14, m_rate=0.010, K_intensity=55.0,
                         crystal_type="bcc", lattice_param=0.287, melting_K=1770.0,
                         density=7.74, thermal_expansion=10.3,
                         thermal_conductivity=24.8, heat_capacity=0.460,
                         heat=13.8, seebeck=3.1, resistivity=57.0),
    "00Cr13Ni5Mo4": dict(E_mod=210000.0, nu=0.29, eq_stress=760.0, eq_strain=0.15,
                         n_harden=0.10, m_rate=0.008, K_intensity=90.0,
                         crystal_type="bcc", lattice_param=0.288, melting_K=1760.0,
                         density=7.72, thermal_expansion=10.8,
                         thermal_conductivity=23.5, heat_capacity=0.455,
                         heat=13.9, seebeck=2.8, resistivity=60.0),
    "Au304":        dict(E_mod=193000.0, nu=0.30, eq_stress=290.0, eq_strain=0.45,
                         n_harden=0.30, m_rate=0.015, K_intensity=120.0,
                         crystal_type="fcc", lattice_param=0.359, melting_K=1720.0,
                         density=7.93, thermal_expansion=17.2,
                         thermal_conductivity=16.2, heat_capacity=0.500,
                         heat=13.8, seebeck=-2.0, resistivity=72.0),
    "Au317":        dict(E_mod=200000.0, nu=0.30, eq_stress=310.0, eq_strain=0.42,
                         n_harden=0.28, m_rate=0.014, K_intensity=115.0,
                         crystal_type="fcc", lattice_param=0.360, melting_K=1710.0,
                         density=7.98, thermal_expansion=16.5,
                         thermal_conductivity=16.3, heat_capacity=0.500,
                         heat=13.9, seebeck=-2.1, resistivity=79.0),
    "Cr17Ti":       dict(E_mod=205000.0, nu=0.285, eq_stress=390.0, eq_strain=0.22,
                         n_harden=0.18, m_rate=0.012, K_intensity=50.0,
                         crystal_type="bcc", lattice_param=0.287, melting_K=1790.0,
                         density=7.70, thermal_expansion=10.4,
                         thermal_conductivity=26.1, heat_capacity=0.460,
                         heat=13.7, seebeck=3.2, resistivity=59.0),
    "Cr25":         dict(E_mod=208000.0, nu=0.285, eq_stress=420.0, eq_strain=0.21,
                         n_harden=0.17, m_rate=0.011, K_intensity=45.0,
                         crystal_type="bcc", lattice_param=0.288, melting_K=1785.0,
                         density=7.65, thermal_expansion=10.1,
                         thermal_conductivity=24.2, heat_capacity=0.459,
                         heat=13.6, seebeck=3.3, resistivity=62.0),
}


def composition(alloy_name: str) -> MaterialComposition:
    if alloy_name not in _COMPOSITIONS:
        raise KeyError(f"unknown alloy {alloy_name!r}; valid names: {ALLOY_NAMES}")
    by_symbol = _COMPOSITIONS[alloy_name]
    m = tuple(by_symbol.get(sym, 0.0) for sym in ELEMENTS)
    return MaterialComposition(alloy_name=alloy_name, m=m)


def nominal_dd(alloy_name: str) -> ThermoMechParams:
    if alloy_name not in _NOMINALS:
        raise KeyError(f"unknown alloy {alloy_name!r}; valid names: {ALLOY_NAMES}")
    vals = dict(_NOMINALS[alloy_name])
    e, nu = vals["E_mod"], vals["nu"]
    vals["lame_lambda"] = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    vals["lame_G"] = e / (2.0 * (1.0 + nu))
    return ThermoMechParams(**vals)


def all_compositions() -> list[MaterialComposition]:
    return [composition(name) for name in ALLOY_NAMES]
