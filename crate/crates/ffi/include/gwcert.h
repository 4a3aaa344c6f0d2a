#ifndef GWCERT_H
#define GWCERT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GwcStatus {
  GWC_STATUS_OK = 0,
  GWC_STATUS_NULL_POINTER = 1,
  GWC_STATUS_INVALID_UTF8 = 2,
  GWC_STATUS_PARSE = 3,
  GWC_STATUS_UNSUPPORTED = 4,
  GWC_STATUS_INVALID_ARGUMENT = 5,
  GWC_STATUS_CAP_EXCEEDED = 6,
  GWC_STATUS_COUNTEREXAMPLE = 7,
  GWC_STATUS_INTERNAL = 8,
  GWC_STATUS_PANIC = 9,
} GwcStatus;

/**
 * Opaque handle: the ring O_w for one field and one w.
 */
typedef struct GwcRing GwcRing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds O_w. `field_toml` is a field-spec document, or NULL for Q.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum GwcStatus gwc_ring_new(const char *field_toml, const char *w, struct GwcRing **out);

/**
 * # Safety
 * `ring` must come from [`gwc_ring_new`] and not be freed twice.
 */
void gwc_ring_free(struct GwcRing *ring);

/**
 * Order of w in (O_w/q^s)^×.
 *
 * # Safety
 * `ring` must be a live handle and `out` writable.
 */
enum GwcStatus gwc_t_order(const struct GwcRing *ring, uint64_t q, uint32_t s, uint64_t *out);

/**
 * Order of w in (O_w/𝔮^s)^× for the `prime_index`-th prime above q.
 *
 * # Safety
 * `ring` must be a live handle and `out` writable.
 */
enum GwcStatus gwc_t_order_prime(const struct GwcRing *ring,
                                 uint64_t q,
                                 size_t prime_index,
                                 uint32_t s,
                                 uint64_t *out);

/**
 * The prime q chosen for scale n and m₂.
 *
 * # Safety
 * `ring` must be a live handle and `out` writable.
 */
enum GwcStatus gwc_select_prime(const struct GwcRing *ring, uint32_t n, uint64_t m2, uint64_t *out);

/**
 * Certificate JSON for scale n. `gens_text` uses the "x,z;x,z" format, NULL for the standard set.
 * Returns `Counterexample` (with the JSON still written) when any verdict fails.
 *
 * # Safety
 * `ring` must be a live handle, `gens_text` NULL or NUL-terminated, `out_json` writable.
 */
enum GwcStatus gwc_certificate_json(const struct GwcRing *ring,
                                    uint32_t n,
                                    const char *gens_text,
                                    uint64_t cap_order,
                                    uint64_t seed,
                                    char **out_json);

/**
 * Runs every verification suite; JSON report in `out_json`.
 *
 * # Safety
 * As for [`gwc_certificate_json`].
 */
enum GwcStatus gwc_verify_all_json(const struct GwcRing *ring,
                                   uint32_t n,
                                   const char *gens_text,
                                   size_t samples,
                                   uint64_t seed,
                                   char **out_json);

/**
 * The last error message on this thread, or NULL. Free with [`gwc_string_free`].
 */
char *gwc_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void gwc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GWCERT_H */
