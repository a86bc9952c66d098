#ifndef FUNCOMP_H
#define FUNCOMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FcAuxPreset {
  FC_AUX_PRESET_IDENTITY = 0,
  FC_AUX_PRESET_CONSTANT = 1,
} FcAuxPreset;

typedef enum FcFunctionClass {
  FC_FUNCTION_CLASS_INVERTIBLE = 0,
  FC_FUNCTION_CLASS_PARTIALLY_INVERTIBLE1 = 1,
  FC_FUNCTION_CLASS_PARTIALLY_INVERTIBLE2 = 2,
  FC_FUNCTION_CLASS_GENERAL = 3,
} FcFunctionClass;

typedef enum FcOrigin {
  FC_ORIGIN_THM1_INNER = 0,
  FC_ORIGIN_THM1_OUTER = 1,
  FC_ORIGIN_THM2_INNER = 2,
  FC_ORIGIN_THM2_OUTER = 3,
  FC_ORIGIN_LEMMA1 = 4,
  FC_ORIGIN_LEMMA2 = 5,
  FC_ORIGIN_LEMMA3 = 6,
  FC_ORIGIN_LEMMA4 = 7,
} FcOrigin;

typedef enum FcStatus {
  FC_STATUS_OK = 0,
  FC_STATUS_NULL_POINTER = 1,
  FC_STATUS_INVALID_ARGUMENT = 2,
  FC_STATUS_PARSE = 3,
  FC_STATUS_VALIDATION = 4,
  FC_STATUS_PRECONDITION = 5,
  FC_STATUS_GUARD = 6,
  FC_STATUS_INTERNAL = 7,
  FC_STATUS_PANIC = 8,
} FcStatus;

/**
 * Opaque source model.
 */
typedef struct FcModel FcModel;

typedef struct FcClassification {
  enum FcFunctionClass function_class;
  bool eve_degraded;
  bool fusion_degraded;
  double residual_eve;
  double residual_fusion;
} FcClassification;

/**
 * Rate bounds in bits/symbol; `d` is meaningful only when `has_d`.
 */
typedef struct FcRateBounds {
  enum FcOrigin origin;
  double r_s;
  double r_w1;
  double r_w2;
  double r_w_sum;
  double r_l_dec;
  double r_l_eve;
  bool has_d;
  double d;
} FcRateBounds;

typedef struct FcSimReport {
  size_t n;
  double error_prob;
  double secrecy_leak;
  double priv_dec;
  double priv_eve;
  double storage1;
  double storage2;
} FcSimReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a model from a NUL-terminated JSON document.
 *
 * # Safety
 * `json` must be a valid C string and `out` writable.
 */
enum FcStatus fc_model_from_json(const char *json, struct FcModel **out);

/**
 * Builtin multiplicative-Bernoulli model.
 *
 * # Safety
 * `out` must be writable.
 */
enum FcStatus fc_model_bernoulli(double beta1,
                                 double beta2,
                                 double alpha,
                                 double q,
                                 struct FcModel **out);

/**
 * Release a model; null is ignored.
 *
 * # Safety
 * `model` must come from an `fc_model_*` constructor and not be used
 * afterwards.
 */
void fc_model_free(struct FcModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum FcStatus fc_classify(const struct FcModel *model, struct FcClassification *out);

/**
 * Evaluate lemma 1-4. Lemma 1 uses the identity auxiliary system and
 * lemma 2 a constant time-sharing variable.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum FcStatus fc_evaluate_lemma(const struct FcModel *model,
                                uint32_t lemma,
                                struct FcRateBounds *out);

/**
 * Lossless inner bound for a preset auxiliary system.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum FcStatus fc_evaluate_inner(const struct FcModel *model,
                                enum FcAuxPreset preset,
                                struct FcRateBounds *out);

/**
 * Exact simulation with direct binning at stored rates `w1`, `w2`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum FcStatus fc_simulate_exact(const struct FcModel *model,
                                size_t n,
                                double w1,
                                double w2,
                                uint64_t seed,
                                struct FcSimReport *out);

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next `fc_*` call on the same thread.
 */
const char *fc_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *fc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUNCOMP_H */
