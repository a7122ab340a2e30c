#ifndef HOPEX_H
#define HOPEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum HopexStatus {
  HOPEX_STATUS_OK = 0,
  HOPEX_STATUS_NULL_POINTER = 1,
  HOPEX_STATUS_INVALID_ARGUMENT = 2,
  HOPEX_STATUS_PROBABILITY = 3,
  HOPEX_STATUS_EXPONENTS = 4,
  HOPEX_STATUS_SCHEMES = 5,
  HOPEX_STATUS_SIMULATOR = 6,
  HOPEX_STATUS_DIAGNOSTICS = 7,
  HOPEX_STATUS_CONFIG = 8,
  HOPEX_STATUS_IO = 9,
  HOPEX_STATUS_PANIC = 10,
  HOPEX_STATUS_BUFFER_TOO_SMALL = 11,
} HopexStatus;

// K-hop network: source pmf, rates and type-I targets.
typedef struct HopexNetwork HopexNetwork;

// Pmf over a product of finite alphabets.
typedef struct HopexPmf HopexPmf;

// Artifacts of one executed run config.
typedef struct HopexRun HopexRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *hopex_version(void);

// Copy the message of the last failed call on this thread into `buf`.
// Returns the number of bytes the message needs (with the nul), or 0 if
// the last call succeeded. Nothing is written when `cap` is too small.
size_t hopex_last_error_message(char *buf, size_t cap);

// Pmf with `rank` axes of sizes `shape`, symbols labelled `0, 1, ...` and
// axes named `Y0, Y1, ...`; `probs` is row-major with the last axis
// fastest.
enum HopexStatus hopex_pmf_new(const size_t *shape,
                               size_t rank,
                               const double *probs,
                               size_t len,
                               struct HopexPmf **out_pmf);

// Doubly symmetric binary source with crossover `p`.
enum HopexStatus hopex_pmf_dsbs(double p, struct HopexPmf **out_pmf);

void hopex_pmf_free(struct HopexPmf *pmf);

enum HopexStatus hopex_pmf_rank(const struct HopexPmf *pmf, size_t *out_rank);

// `I(Y_a; Y_b)` in bits for two distinct axes.
enum HopexStatus hopex_mutual_information(const struct HopexPmf *pmf,
                                          size_t axis_a,
                                          size_t axis_b,
                                          double *out_bits);

// `eta(R)` of a two-axis pmf `(Y_{l-1}, Y_l)`.
enum HopexStatus hopex_eta(const struct HopexPmf *pair,
                           double rate,
                           size_t aux_card,
                           double *out_bits);

// Grid-search reference for [`hopex_eta`] on small alphabets.
enum HopexStatus hopex_eta_oracle(const struct HopexPmf *pair,
                                  double rate,
                                  size_t grid_steps,
                                  size_t aux_card,
                                  double *out_bits);

// `H(X|Y)` of a two-axis pmf `(X, Y)`.
enum HopexStatus hopex_lossless_bound(const struct HopexPmf *pair, double *out_bits);

// Wyner-Ziv rate of `(X, Y)` under Hamming distortion at most `d`.
enum HopexStatus hopex_wyner_ziv_hamming(const struct HopexPmf *pair,
                                         double d,
                                         size_t s_card,
                                         double *out_bits);

// Network over the axes of `pmf` with `hops = rank - 1` rates and targets.
enum HopexStatus hopex_network_new(const struct HopexPmf *pmf,
                                   const double *rates,
                                   const double *epsilons,
                                   size_t hops,
                                   struct HopexNetwork **out_network);

// Markov chain of binary symmetric steps with uniform `Y0`.
enum HopexStatus hopex_network_dsbs_chain(const double *crossovers,
                                          const double *rates,
                                          const double *epsilons,
                                          size_t hops,
                                          struct HopexNetwork **out_network);

void hopex_network_free(struct HopexNetwork *network);

enum HopexStatus hopex_network_hops(const struct HopexNetwork *network, size_t *out_hops);

// New handle on the pair `(Y_{hop-1}, Y_hop)` of a network.
enum HopexStatus hopex_network_hop_pair(const struct HopexNetwork *network,
                                        size_t hop,
                                        struct HopexPmf **out_pmf);

// Parse and execute a JSON run config (the format `hopex` reads) without
// writing files. Relative paths resolve against the working directory.
enum HopexStatus hopex_run_config(const char *config_json, struct HopexRun **out_run);

void hopex_run_free(struct HopexRun *run);

enum HopexStatus hopex_run_artifact_count(const struct HopexRun *run, size_t *out_count);

// File name of artifact `index`. Pass a null `buf` with `cap = 0` to
// query the size through `needed`.
enum HopexStatus hopex_run_artifact_name(const struct HopexRun *run,
                                         size_t index,
                                         char *buf,
                                         size_t cap,
                                         size_t *needed);

// Contents of artifact `index`, same buffer protocol as the name.
enum HopexStatus hopex_run_artifact_contents(const struct HopexRun *run,
                                             size_t index,
                                             char *buf,
                                             size_t cap,
                                             size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOPEX_H */
