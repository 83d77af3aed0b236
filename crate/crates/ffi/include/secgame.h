#ifndef SECGAME_H
#define SECGAME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_UTF8 = 2,
  SG_STATUS_PARSE_ERROR = 3,
  SG_STATUS_INVALID_SPEC = 4,
  SG_STATUS_SOLVER_FAILED = 5,
  SG_STATUS_BUFFER_TOO_SMALL = 6,
  SG_STATUS_PANIC = 7,
} SgStatus;

/**
 * An equilibrium of the game it was solved from.
 */
typedef struct SgEquilibrium SgEquilibrium;

/**
 * A validated game instance.
 */
typedef struct SgGame SgGame;

/**
 * Best-response gains and the overall verdict of a verification.
 */
typedef struct SgVerification {
  bool passed;
  double eps_attacker;
  double eps_defender;
  double kkt_residual;
} SgVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into this library.
 */
const char *sg_last_error(void);

/**
 * Parses and validates a game from a NUL-terminated JSON string.
 *
 * # Safety
 * `json` must be null or a valid C string; `out` must be null or writable.
 */
enum SgStatus sg_game_from_json(const char *json, struct SgGame **out);

/**
 * # Safety
 * `game` must be null or a handle from [`sg_game_from_json`] not yet freed.
 */
void sg_game_free(struct SgGame *game);

/**
 * Number of targets, or 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
size_t sg_game_num_targets(const struct SgGame *game);

/**
 * Copy of `game` with new budgets.
 *
 * # Safety
 * `game` must be null or a live handle; `out` must be null or writable.
 */
enum SgStatus sg_game_with_budgets(const struct SgGame *game,
                                   double budget_attacker,
                                   double budget_defender,
                                   struct SgGame **out);

/**
 * Solves `game`. For a family of equilibria the representative member is returned.
 *
 * # Safety
 * `game` must be null or a live handle; `out` must be null or writable.
 */
enum SgStatus sg_solve(const struct SgGame *game, struct SgEquilibrium **out);

/**
 * # Safety
 * `eq` must be null or a handle from [`sg_solve`] not yet freed.
 */
void sg_equilibrium_free(struct SgEquilibrium *eq);

/**
 * Writes the attacker's allocation into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `eq` must be null or a live handle; `buf` must be null or valid for `len` writes.
 */
enum SgStatus sg_equilibrium_attacker(const struct SgEquilibrium *eq, double *buf, size_t len);

/**
 * Writes the defender's allocation into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `eq` must be null or a live handle; `buf` must be null or valid for `len` writes.
 */
enum SgStatus sg_equilibrium_defender(const struct SgEquilibrium *eq, double *buf, size_t len);

/**
 * Shadow prices of the attacker and defender budgets.
 *
 * # Safety
 * `eq` must be null or a live handle; `lambda` and `rho` must be null or writable.
 */
enum SgStatus sg_equilibrium_duals(const struct SgEquilibrium *eq, double *lambda, double *rho);

/**
 * # Safety
 * `eq` must be null or a live handle; both outputs must be null or writable.
 */
enum SgStatus sg_equilibrium_utilities(const struct SgEquilibrium *eq,
                                       double *attacker,
                                       double *defender);

/**
 * Budget domain as 1 to 4, or 0 for a null handle.
 *
 * # Safety
 * `eq` must be null or a live handle.
 */
uint32_t sg_equilibrium_domain(const struct SgEquilibrium *eq);

/**
 * The equilibrium as JSON. Release the string with [`sg_string_free`].
 *
 * # Safety
 * `eq` must be null or a live handle; `out` must be null or writable.
 */
enum SgStatus sg_equilibrium_to_json(const struct SgEquilibrium *eq, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void sg_string_free(char *s);

/**
 * Checks `eq` against both players' best responses with relative
 * tolerance `tol`, plus feasibility, KKT and ordering invariants.
 * A failed check is reported through `out.passed`, not the status.
 *
 * # Safety
 * `game` and `eq` must be null or live handles; `out` must be null or writable.
 */
enum SgStatus sg_verify(const struct SgGame *game,
                        const struct SgEquilibrium *eq,
                        double tol,
                        struct SgVerification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECGAME_H */
