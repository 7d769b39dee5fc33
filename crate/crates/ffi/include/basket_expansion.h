#ifndef BASKET_EXPANSION_H
#define BASKET_EXPANSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BxStatus {
  BX_STATUS_OK = 0,
  BX_STATUS_INVALID_ARGUMENT = 1,
  BX_STATUS_DOMAIN = 2,
  BX_STATUS_DEGENERATE = 3,
  BX_STATUS_NUMERICAL = 4,
  BX_STATUS_NOT_PSD = 5,
  BX_STATUS_REDUCTION = 6,
  BX_STATUS_NULL_POINTER = 7,
  BX_STATUS_PANIC = 8,
} BxStatus;

typedef enum BxProxy {
  BX_PROXY_GEOMETRIC = 0,
  BX_PROXY_LEVY = 1,
} BxProxy;

typedef enum BxSampler {
  BX_SAMPLER_PSEUDORANDOM = 0,
  BX_SAMPLER_SOBOL = 1,
} BxSampler;

/**
 * Opaque priced instrument.
 */
typedef struct BxBasket BxBasket;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Basket with an explicit row-major `n × n` log-covariance.
 *
 * # Safety
 * `weights`, `forwards` must point to `n` values, `covariance` to `n * n`
 * values and `out` to writable storage for one handle pointer.
 */
enum BxStatus bx_basket_new(size_t n,
                            const double *weights,
                            const double *forwards,
                            const double *covariance,
                            double strike,
                            double discount,
                            double maturity,
                            bool is_call,
                            struct BxBasket **out);

/**
 * Asian option on one asset with flat rate, yield and volatility.
 * `weights` may be null for an equally weighted average.
 *
 * # Safety
 * `times` (and `weights` when non-null) must point to `n_times` values and
 * `out` to writable storage for one handle pointer.
 */
enum BxStatus bx_asian_new(double spot,
                           double rate,
                           double dividend_yield,
                           double vol,
                           size_t n_times,
                           const double *times,
                           const double *weights,
                           double strike,
                           bool is_call,
                           struct BxBasket **out);

/**
 * Vanilla option paying cash dividends `amounts[i]` at `times[i]`, with
 * flat rate and volatility.
 *
 * # Safety
 * `times` and `amounts` must point to `n_dividends` values and `out` to
 * writable storage for one handle pointer.
 */
enum BxStatus bx_dividend_new(double spot,
                              double rate,
                              double vol,
                              size_t n_dividends,
                              const double *times,
                              const double *amounts,
                              double strike,
                              double maturity,
                              bool is_call,
                              struct BxBasket **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `handle` must come from a `bx_*_new` call and not be used afterwards.
 */
void bx_basket_free(struct BxBasket *handle);

/**
 * Number of assets in the reduced basket.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum BxStatus bx_basket_len(const struct BxBasket *handle, size_t *out);

/**
 * Basket forward `Σ wᵢFᵢ` of the reduced basket.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum BxStatus bx_basket_forward(const struct BxBasket *handle, double *out);

/**
 * Expansion price of order 0 to 3 around the proxy given as a `BxProxy` value.
 *
 * # Safety
 * `handle` must be a live handle and `out_price` writable.
 */
enum BxStatus bx_price_expansion(const struct BxBasket *handle,
                                 uint32_t proxy,
                                 uint32_t order,
                                 double *out_price);

/**
 * Monte Carlo price and standard error with a `BxSampler` value.
 * `out_std_error` may be null.
 *
 * # Safety
 * `handle` must be a live handle, `out_price` writable and
 * `out_std_error` writable or null.
 */
enum BxStatus bx_price_mc(const struct BxBasket *handle,
                          uint64_t paths,
                          uint64_t seed,
                          uint32_t sampler,
                          bool antithetic,
                          double *out_price,
                          double *out_std_error);

/**
 * Message of the last failed call on this thread, empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *bx_last_error(void);

/**
 * Library version as a static string.
 */
const char *bx_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BASKET_EXPANSION_H */
