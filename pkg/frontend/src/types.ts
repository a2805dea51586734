/** Payload shapes for the inference service endpoints. */

export interface MaterialInfo {
  name: string;
  composition: Record<string, number>;
  d_d: Record<string, number | string>;
}

export interface GeneratedSample {
  /** base64-encoded binary PGM */
  image: string;
  h_v_estimate: number[];
  d_r_prediction: Record<string, number>;
  seed_used: number;
}

export interface GenerateResponse {
  dataset_version: string;
  seed_used: number;
  samples: GeneratedSample[];
}

export interface PredictResponse {
  alloy_name: string;
  d_r_prediction: Record<string, number>;
}

export interface HealthResponse {
  status: string;
  message?: string | null;
  dataset_version?: string;
  bundles?: Record<string, string>;
  warnings?: string[];
}

export interface GenerateRequest {
  alloy_name: string;
  d_c: Record<string, number>;
  n: number;
  seed?: number;
}

export interface FieldError {
  field: string;
  message: string;
}
