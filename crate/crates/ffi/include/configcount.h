#ifndef CONFIGCOUNT_H
#define CONFIGCOUNT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcIncrementStatus {
  CC_INCREMENT_STATUS_UNIFORM = 0,
  CC_INCREMENT_STATUS_WINDOW_EXHAUSTED = 1,
  CC_INCREMENT_STATUS_STEP_BOUND = 2,
} CcIncrementStatus;

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_NOT_PRIME = 3,
  CC_STATUS_DIMENSION_MISMATCH = 4,
  CC_STATUS_UNBOUNDED = 5,
  CC_STATUS_DEGENERATE_SIMPLEX = 6,
  CC_STATUS_NO_COPIES = 7,
  CC_STATUS_CAP_EXCEEDED = 8,
  CC_STATUS_WITNESS_NOT_FOUND = 9,
  CC_STATUS_PARSE = 10,
  CC_STATUS_IO = 11,
  CC_STATUS_BUFFER_TOO_SMALL = 12,
  CC_STATUS_PANIC = 13,
} CcStatus;

// One function per edge of the rectangle bundle on `d` blocks with
// `k`-element base edges.
typedef struct CcFamily CcFamily;

// A real table over `F_q^m`.
typedef struct CcFieldFunction CcFieldFunction;

// A finite set inside a cube window of `Z^n`.
typedef struct CcLatticeSet CcLatticeSet;

// Output of the weak regularity loop.
typedef struct CcRegularization CcRegularization;

// A lattice simplex with its first point at the origin.
typedef struct CcSimplex CcSimplex;

typedef struct CcUniformity {
  double overall;
  double max_relative;
  bool is_uniform;
} CcUniformity;

typedef struct CcIncrement {
  uintptr_t steps;
  uintptr_t step_bound;
  double start_density;
  double final_density;
  enum CcIncrementStatus status;
} CcIncrement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cc_version(void);

// Copies the last error of this thread into `buf`. Returns the size needed
// including the NUL; nothing is written when `len` is too small.
uintptr_t cc_last_error_message(char *buf, uintptr_t len);

// `values` holds `q^m` entries in row-major coordinate order.
enum CcStatus cc_field_function_new(uintptr_t q,
                                    uintptr_t m,
                                    const double *values,
                                    uintptr_t len,
                                    struct CcFieldFunction **out_handle);

void cc_field_function_free(struct CcFieldFunction *f);

// `||f||_box` over `k` blocks of `F_q^2`.
enum CcStatus cc_box_norm(const struct CcFieldFunction *f, uintptr_t k, double *result);

// `functions` lists one handle per edge in bundle order; the tables are copied.
enum CcStatus cc_family_new(uintptr_t d,
                            uintptr_t k,
                            uintptr_t q,
                            const struct CcFieldFunction *const *functions,
                            uintptr_t count,
                            struct CcFamily **out_handle);

// The same table on every edge.
enum CcStatus cc_family_uniform(uintptr_t d,
                                uintptr_t k,
                                const struct CcFieldFunction *f,
                                struct CcFamily **out_handle);

void cc_family_free(struct CcFamily *fam);

// Number of edges, i.e. the number of functions `cc_family_new` expects.
uintptr_t cc_family_edge_count(const struct CcFamily *fam);

// `N_t` for a `d = k` family with one side length per block.
enum CcStatus cc_eval_n(const struct CcFamily *fam,
                        const uint64_t *ts,
                        uintptr_t len,
                        double *result);

enum CcStatus cc_eval_m(const struct CcFamily *fam, double *result);

enum CcStatus cc_min_box_norm(const struct CcFamily *fam, double *result);

enum CcStatus cc_weak_regularize(const struct CcFamily *fam,
                                 double eps,
                                 struct CcRegularization **out_handle);

void cc_regularization_free(struct CcRegularization *reg);

uintptr_t cc_regularization_iterations(const struct CcRegularization *reg);

// Largest final residual box norm.
double cc_regularization_max_residual(const struct CcRegularization *reg);

// Final energy, the last entry of the energy trace.
double cc_regularization_energy(const struct CcRegularization *reg);

// `|E sigma_t - 1| sqrt(q)` and `max_{xi != 0} |sigma_t^(xi)| sqrt(q)`.
enum CcStatus cc_sphere_decay(uint64_t q,
                              uint64_t t,
                              double *mean_deviation,
                              double *max_decay_const);

// `points` holds `k * n` coordinates, one point per row, the first row zero.
enum CcStatus cc_simplex_new(uintptr_t n,
                             uintptr_t k,
                             const int64_t *points,
                             uintptr_t len,
                             struct CcSimplex **out_handle);

// Parses `{"n": .., "points": [[..], ..]}`.
enum CcStatus cc_simplex_from_json(const char *json, struct CcSimplex **out_handle);

void cc_simplex_free(struct CcSimplex *s);

// Number of copies of `lambda Delta` with vertex differences in `(qZ)^n`.
enum CcStatus cc_count_copies(const struct CcSimplex *s,
                              uint64_t lambda2,
                              uint64_t q,
                              uint64_t *result);

// `members` holds `side^n` flags (nonzero = member) in row-major order
// starting at `corner`.
enum CcStatus cc_lattice_set_new(uintptr_t n,
                                 const int64_t *corner,
                                 uint64_t side,
                                 const uint8_t *members,
                                 uintptr_t len,
                                 struct CcLatticeSet **out_handle);

void cc_lattice_set_free(struct CcLatticeSet *s);

double cc_lattice_set_density(const struct CcLatticeSet *s);

// `worst_residue` receives `n` coordinates when non-null.
enum CcStatus cc_uniformity_test(const struct CcLatticeSet *s,
                                 double eps,
                                 uint64_t modulus,
                                 struct CcUniformity *result,
                                 int64_t *worst_residue);

enum CcStatus cc_density_increment(const struct CcLatticeSet *s,
                                   double eps,
                                   uint64_t modulus,
                                   struct CcIncrement *result);

// `lcm(1..floor(c eps^{-10}))` in decimal; ranges beyond `cap` are refused.
enum CcStatus cc_q_epsilon(double eps,
                           double c,
                           uint64_t cap,
                           char *buf,
                           uintptr_t len,
                           uintptr_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFIGCOUNT_H */
