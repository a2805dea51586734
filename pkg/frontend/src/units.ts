/** Field catalogs: condition inputs and performance-table rows with units.
 *
 * Slider bounds are the synthesis ranges the models were trained on; the
 * service itself only requires nonnegative doses and positive temperatures,
 * so the number inputs accept values past the slider ends.
 */

export interface DcFieldDef {
  key: string;
  label: string;
  unit: string;
  min: number;
  max: number;
  step: number;
  default: number;
}

export const DC_FIELDS: readonly DcFieldDef[] = [
  { key: "phi_fast", label: "Fast neutron dose", unit: "1e19 n/cm^2", min: 0, max: 30, step: 0.5, default: 8 },
  { key: "phi_thermal", label: "Thermal neutron dose", unit: "1e19 n/cm^2", min: 0, max: 30, step: 0.5, default: 12 },
  { key: "phi_flux", label: "Neutron flux volume", unit: "1e19 n/cm^2", min: 0, max: 30, step: 0.5, default: 10 },
  { key: "T_irr", label: "Irradiation temperature", unit: "K", min: 400, max: 1100, step: 5, default: 650 },
  { key: "T_exp", label: "Exposure temperature", unit: "K", min: 300, max: 800, step: 5, default: 420 },
];

export interface DrRowDef {
  key: string;
  unit: string;
}

/** Row order matches the service's d_r_prediction field order. */
export const DR_ROWS: readonly DrRowDef[] = [
  { key: "delta_s", unit: "MPa" },
  { key: "delta_b", unit: "MPa" },
  { key: "delta_e", unit: "MPa" },
  { key: "delta_L", unit: "%" },
  { key: "H_B", unit: "" },
  { key: "H_RC", unit: "" },
  { key: "H_V", unit: "" },
  { key: "K_v", unit: "%" },
  { key: "K_L", unit: "%" },
  { key: "K_Ic", unit: "" },
  { key: "delta_t", unit: "MPa" },
  { key: "C_He", unit: "probability" },
];

export const N_BINS = 8;
