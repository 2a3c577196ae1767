#ifndef POLSOURCE_H
#define POLSOURCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_UTF8 = 2,
  PS_STATUS_CONFIG_ERROR = 3,
  PS_STATUS_RUNTIME_ERROR = 4,
  PS_STATUS_OUT_OF_RANGE = 5,
  PS_STATUS_PANIC = 6,
} PsStatus;

/**
 * Validated experiment configuration.
 */
typedef struct PsConfig PsConfig;

/**
 * Photon flux envelope of one pulse program.
 */
typedef struct PsEnvelope PsEnvelope;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ps_last_error(void);

/**
 * Library version, static storage.
 */
const char *ps_version(void);

/**
 * New handle holding the built-in parameter set.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PsStatus ps_config_default(struct PsConfig **out);

/**
 * Parses and validates a TOML document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum PsStatus ps_config_from_toml(const char *toml, struct PsConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle from this library not yet freed.
 */
void ps_config_free(struct PsConfig *config);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum PsStatus ps_config_set_seed(struct PsConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum PsStatus ps_config_set_trajectories(struct PsConfig *config, size_t trajectories);

/**
 * Runs the configured pulse program through the master equation.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum PsStatus ps_envelope_run(const struct PsConfig *config, struct PsEnvelope **out);

/**
 * # Safety
 * `envelope` must be NULL or a handle from this library not yet freed.
 */
void ps_envelope_free(struct PsEnvelope *envelope);

/**
 * Number of time samples; 0 for NULL.
 *
 * # Safety
 * `envelope` must be NULL or a live handle.
 */
size_t ps_envelope_len(const struct PsEnvelope *envelope);

/**
 * Sample `index`: time (s) and σ⁺/σ⁻ output flux (1/s).
 *
 * # Safety
 * `envelope` must be a live handle; the out pointers must be writable.
 */
enum PsStatus ps_envelope_sample(const struct PsEnvelope *envelope,
                                 size_t index,
                                 double *time,
                                 double *flux_plus,
                                 double *flux_minus);

/**
 * Number of pulse slots; 0 for NULL.
 *
 * # Safety
 * `envelope` must be NULL or a live handle.
 */
size_t ps_envelope_slot_count(const struct PsEnvelope *envelope);

/**
 * Integrated photons of slot `index` and whether its pump is ω₊ (1) or ω₋ (0).
 *
 * # Safety
 * `envelope` must be a live handle; the out pointers must be writable.
 */
enum PsStatus ps_envelope_slot(const struct PsEnvelope *envelope,
                               size_t index,
                               double *photons_plus,
                               double *photons_minus,
                               int *omega_plus);

/**
 * Two-photon interference visibility at the configured Ω₀ and t_p.
 *
 * # Safety
 * `config` must be a live handle; `visibility` must be writable.
 */
enum PsStatus ps_hom_visibility(const struct PsConfig *config, double *visibility);

/**
 * Conditional generation probabilities and their standard errors.
 *
 * # Safety
 * `config` must be a live handle; `out` must point to 4 writable doubles,
 * filled as p(σ⁺|σ⁻), its error, p(σ⁻|σ⁺), its error.
 */
enum PsStatus ps_conditional(const struct PsConfig *config, double *out);

/**
 * Cavity field decay rate κ (rad/s) from length (m) and finesse.
 *
 * # Safety
 * `kappa` must be writable.
 */
enum PsStatus ps_cavity_kappa(double length, double finesse, double *kappa);

/**
 * Ground-state Zeeman splitting Δ_B (rad/s) for a field in gauss.
 *
 * # Safety
 * `splitting` must be writable.
 */
enum PsStatus ps_zeeman_splitting(double b_gauss, double g_factor, double *splitting);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLSOURCE_H */
