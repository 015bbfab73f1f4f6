#ifndef SCDRL_H
#define SCDRL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Exit/status codes shared with the CLI. */
#define SCDRL_OK 0
#define SCDRL_ERR_CONFIG 2
#define SCDRL_ERR_RUNTIME 3

typedef struct scdrl_ctx scdrl_ctx;
typedef struct scdrl_network scdrl_network;

/* Context owns the last error message. Never returns NULL except on OOM. */
scdrl_ctx* scdrl_ctx_new(void);
void scdrl_ctx_free(scdrl_ctx* ctx);

/* Message of the most recent failing call on this context; empty string when
 * the last call succeeded. Owned by the context. */
const char* scdrl_last_error(const scdrl_ctx* ctx);

/* Runs one experiment command ("bench-apc", "bench-stanh", "bench-timing",
 * "compare-sc", "train", "evaluate", "gen-traces"). `config_path` may be NULL
 * to run with built-in defaults; when given, the file's "command" field is
 * overridden by `command` if that is non-NULL. `seed_override` is used when
 * >= 0, `out_dir` and baseline when non-NULL / non-negative. Returns
 * SCDRL_OK, SCDRL_ERR_CONFIG or SCDRL_ERR_RUNTIME. */
int scdrl_run(scdrl_ctx* ctx, const char* command, const char* config_path,
              int64_t seed_override, const char* out_dir,
              int baseline_override);

/* Steady-state delay in ns for one stream of `length` bits. `pipelined` is
 * 0 or 1. Returns SCDRL_OK and writes *delay_ns. */
int scdrl_delay_ns(scdrl_ctx* ctx, uint32_t length, int pipelined,
                   double* delay_ns);

/* Mean approximate-parallel-counter inaccuracy (percent) for the named
 * variant ("original" or "improved") with n inputs. */
int scdrl_apc_inaccuracy(scdrl_ctx* ctx, const char* variant, int n_inputs,
                         uint32_t length, uint32_t trials, uint64_t seed,
                         double* inaccuracy_pct);

/* Loads a weight file written by the train/compare pipelines. */
int scdrl_network_load(scdrl_ctx* ctx, const char* weight_path,
                       scdrl_network** out);
void scdrl_network_free(scdrl_network* net);

int scdrl_network_input_width(const scdrl_network* net);

/* Exact forward pass; `input` has input_width entries. */
int scdrl_network_forward(scdrl_ctx* ctx, const scdrl_network* net,
                          const double* input, size_t input_len, double* q_out);

/* Bit-accurate stochastic forward pass with stream length L. */
int scdrl_network_forward_sc(scdrl_ctx* ctx, const scdrl_network* net,
                             const double* input, size_t input_len,
                             uint32_t stream_length, uint64_t seed,
                             double* q_out);

#ifdef __cplusplus
}
#endif

#endif /* SCDRL_H */
