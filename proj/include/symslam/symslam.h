/* C interface to the symslam backend.
 *
 * Every call returns a status code; 0 is success and the other values match
 * the library's error codes. The message of the last failure on the calling
 * thread is available from symslam_last_error(). Handles are opaque and owned
 * by the caller, who releases them with the matching *_free function.
 */
#ifndef SYMSLAM_SYMSLAM_H
#define SYMSLAM_SYMSLAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(SYMSLAM_BUILDING_LIBRARY)
#define SYMSLAM_API __attribute__((visibility("default")))
#else
#define SYMSLAM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum symslam_status {
  SYMSLAM_OK = 0,
  SYMSLAM_INVALID_ARGUMENT = 1,
  SYMSLAM_ROTATION_NEAR_PI = 2,
  SYMSLAM_DEGENERATE_MATRIX = 3,
  SYMSLAM_EMPTY_POINTMAP = 4,
  SYMSLAM_NON_POSITIVE_CONFIDENCE = 5,
  SYMSLAM_NON_POSITIVE_NORMALIZER = 6,
  SYMSLAM_ZERO_CONFIDENCE = 7,
  SYMSLAM_INSUFFICIENT_LANDMARKS = 8,
  SYMSLAM_INSUFFICIENT_OVERLAP = 9,
  SYMSLAM_DIMENSION_MISMATCH = 10,
  SYMSLAM_DEGENERATE_DENOMINATOR = 11,
  SYMSLAM_DUPLICATE_PASS = 12,
  SYMSLAM_SINGULAR_NORMAL_EQUATIONS = 13,
  SYMSLAM_DISCONNECTED_GRAPH = 14,
  SYMSLAM_MISSING_NODE = 15,
  SYMSLAM_DEGENERATE_CONFIGURATION = 16,
  SYMSLAM_NO_ASSOCIATIONS = 17,
  SYMSLAM_EMPTY_CLOUD = 18,
  SYMSLAM_UNKNOWN_VARIANT = 19,
  SYMSLAM_PARSE_ERROR = 20,
  SYMSLAM_IO_ERROR = 21,
  SYMSLAM_INTERNAL_ERROR = 99
};

typedef struct symslam_scenario symslam_scenario;
typedef struct symslam_graph symslam_graph;

typedef struct symslam_run_summary {
  double ate_rmse;
  size_t ate_matched;
  double accuracy;
  double completeness;
  double chamfer;
  size_t nodes;
  size_t pose_edges;
  size_t scale_edges;
  size_t loop_edges;
  size_t loops_accepted;
  int iterations;
} symslam_run_summary;

typedef struct symslam_optimize_summary {
  int iterations;
  double initial_cost;
  double final_cost;
  const char* termination; /* static string */
} symslam_optimize_summary;

SYMSLAM_API const char* symslam_version(void);
SYMSLAM_API const char* symslam_status_name(int status);
/* Message of the last failed call on this thread; "" if none. */
SYMSLAM_API const char* symslam_last_error(void);

/* Scenario configuration. */
SYMSLAM_API int symslam_scenario_default(symslam_scenario** out);
SYMSLAM_API int symslam_scenario_load(const char* path, symslam_scenario** out);
/* Dotted key as in the scenario file, e.g. "graph.N", "seed", "variant". */
SYMSLAM_API int symslam_scenario_set(symslam_scenario* scenario, const char* key, const char* value);
/* Copies the scenario text into buf (NUL-terminated, truncated to buflen)
 * and stores the full length in *needed when non-null. */
SYMSLAM_API int symslam_scenario_text(const symslam_scenario* scenario, char* buf, size_t buflen, size_t* needed);
SYMSLAM_API void symslam_scenario_free(symslam_scenario* scenario);

/* Runs the full pipeline; writes artifacts into out_dir when it is non-null.
 * summary may be null. */
SYMSLAM_API int symslam_run(const symslam_scenario* scenario, const char* out_dir, symslam_run_summary* summary);

/* ATE between two trajectory files. align is "sim3", "se3" or "none". */
SYMSLAM_API int symslam_eval(const char* est_path, const char* ref_path, const char* align, double tolerance,
                             double* ate_rmse, size_t* matched);

/* Runs `variant` over the seeds and writes summary.csv, ate_table.csv and the
 * trajectory plot file into out_dir (when non-null). */
SYMSLAM_API int symslam_ablate(const symslam_scenario* scenario, const char* variant, const uint64_t* seeds,
                               size_t num_seeds, const char* out_dir, double* median_ate);
/* Same for several variants at once; the plot files in out_dir cover all of
 * them. median_ates, when non-null, receives one value per variant. */
SYMSLAM_API int symslam_ablate_variants(const symslam_scenario* scenario, const char* const* variants,
                                        size_t num_variants, const uint64_t* seeds, size_t num_seeds,
                                        const char* out_dir, double* median_ates);

/* Pose graph files. */
SYMSLAM_API int symslam_graph_load(const char* path, symslam_graph** out);
SYMSLAM_API int symslam_graph_save(const symslam_graph* graph, const char* path);
SYMSLAM_API size_t symslam_graph_num_nodes(const symslam_graph* graph);
SYMSLAM_API size_t symslam_graph_num_edges(const symslam_graph* graph);
/* Re-runs the invariant checks; violations are then readable by index. */
SYMSLAM_API int symslam_graph_validate(symslam_graph* graph, size_t* num_violations);
SYMSLAM_API const char* symslam_graph_violation(const symslam_graph* graph, size_t index);
/* max_iterations <= 0 keeps the default. */
SYMSLAM_API int symslam_graph_optimize(symslam_graph* graph, int max_iterations, symslam_optimize_summary* summary);
/* Text of the last optimization report (one line per iteration). */
SYMSLAM_API const char* symslam_graph_report(const symslam_graph* graph);
SYMSLAM_API void symslam_graph_free(symslam_graph* graph);

#ifdef __cplusplus
}
#endif

#endif /* SYMSLAM_SYMSLAM_H */
