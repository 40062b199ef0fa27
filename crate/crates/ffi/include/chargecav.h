#ifndef CHARGECAV_H
#define CHARGECAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CqCnotVariant {
  CQ_CNOT_VARIANT_VERIFIED = 0,
  CQ_CNOT_VARIANT_LITERAL = 1,
} CqCnotVariant;

typedef enum CqCommand {
  CQ_COMMAND_GATE_AUDIT = 0,
  CQ_COMMAND_SCHEDULE = 1,
  CQ_COMMAND_TRANSFER = 2,
  CQ_COMMAND_SWEEP = 3,
  CQ_COMMAND_SPECTRUM = 4,
} CqCommand;

typedef enum CqStatus {
  CQ_STATUS_OK = 0,
  // A required pointer argument was null.
  CQ_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  CQ_STATUS_INVALID_UTF8 = 2,
  // Malformed or inconsistent input.
  CQ_STATUS_INVALID = 3,
  // Numerical failure.
  CQ_STATUS_NUMERIC = 4,
  CQ_STATUS_PANIC = 5,
} CqStatus;

// Opaque device handle.
typedef struct CqDevice CqDevice;

// Opaque square complex matrix.
typedef struct CqOperator CqOperator;

typedef struct CqGateReport {
  double fidelity;
  double leakage;
  double makhlin_g1_re;
  double makhlin_g1_im;
  double makhlin_g2;
} CqGateReport;

typedef struct CqTransferReport {
  // Final receiver population.
  double fidelity;
  double photon1;
  double photon2;
  double loss;
  double max_norm_increase;
  size_t accepted_steps;
  size_t rejected_steps;
} CqTransferReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *cq_version(void);

// Message of the last failing call on this thread, or null if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *cq_last_error(void);

// Parses a device from a JSON string.
//
// # Safety
// `json` must be a valid nul-terminated string and `out` writable.
enum CqStatus cq_device_from_json(const char *json, struct CqDevice **out);

// Loads a device from a JSON file.
//
// # Safety
// `path` must be a valid nul-terminated string and `out` writable.
enum CqStatus cq_device_from_path(const char *path, struct CqDevice **out);

// Number of qubits, or 0 for a null handle.
//
// # Safety
// `dev` must be null or a live device handle.
size_t cq_device_n_qubits(const struct CqDevice *dev);

// Hilbert-space dimension `2^n_qubits · n_ph`.
//
// # Safety
// `dev` must be a live device handle and `out` writable.
enum CqStatus cq_device_dim(const struct CqDevice *dev, size_t *out);

// # Safety
// `dev` must be null or a handle not yet freed.
void cq_device_free(struct CqDevice *dev);

// Matrix dimension, or 0 for a null handle.
//
// # Safety
// `op` must be null or a live operator handle.
size_t cq_operator_dim(const struct CqOperator *op);

// Reads entry `(row, col)`.
//
// # Safety
// `op` must be a live operator handle; `re` and `im` writable.
enum CqStatus cq_operator_get(const struct CqOperator *op,
                              size_t row,
                              size_t col,
                              double *re,
                              double *im);

// # Safety
// `op` must be null or a handle not yet freed.
void cq_operator_free(struct CqOperator *op);

// Ideal qubit-to-photon swap on qubit `k` with winding number `n_winding`.
//
// # Safety
// `dev` must be a live device handle and `out` writable.
enum CqStatus cq_gate_swap_qubit_photon(const struct CqDevice *dev,
                                        size_t k,
                                        int64_t n_winding,
                                        struct CqOperator **out);

// CNOT composition with control `j` and target `k`, audited on the photon
// vacuum. `out_op` may be null when only the report is wanted.
//
// # Safety
// `dev` must be a live device handle, `report` writable and `out_op` null
// or writable.
enum CqStatus cq_gate_cnot(const struct CqDevice *dev,
                           size_t j,
                           size_t k,
                           enum CqCnotVariant variant,
                           struct CqOperator **out_op,
                           struct CqGateReport *report);

// Ascending eigenvalues of the exact lab-frame Hamiltonian with the
// device's default terms.
//
// `*len` receives the number of eigenvalues. If `values` is null or
// `capacity` is smaller, nothing is copied and `CQ_STATUS_INVALID` is
// returned, so a first call with `values = NULL` sizes the buffer.
//
// # Safety
// `dev` must be a live device handle, `len` writable and `values` null or
// valid for `capacity` writes.
enum CqStatus cq_spectrum(const struct CqDevice *dev, double *values, size_t capacity, size_t *len);

// Runs a transfer configuration given as JSON (the `params` object of a
// transfer scenario).
//
// # Safety
// `config_json` must be a valid nul-terminated string and `report` writable.
enum CqStatus cq_transfer_run(const char *config_json, struct CqTransferReport *report);

// Runs a scenario file as the `sim` binary would and stores its exit code
// (0 pass, 1 failure, 2 invalid input) in `exit_code`. `out_path` may be
// null to keep the scenario's output path. Returns `CQ_STATUS_OK` whenever
// the command ran to a verdict.
//
// # Safety
// `config_path` must be a valid nul-terminated string, `out_path` null or
// one, and `exit_code` writable.
enum CqStatus cq_run_scenario(enum CqCommand command,
                              const char *config_path,
                              const char *out_path,
                              int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHARGECAV_H */
