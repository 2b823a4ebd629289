#ifndef SCENEGEN_H
#define SCENEGEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SgStatus {
  SgStatus_Ok = 0,
  SgStatus_NullArgument = 1,
  SgStatus_InvalidUtf8 = 2,
  SgStatus_InvalidScene = 3,
  SgStatus_UnknownCategory = 4,
  SgStatus_UntrainedCategory = 5,
  SgStatus_ModelFormat = 6,
  SgStatus_NoValidCell = 7,
  SgStatus_Io = 8,
  SgStatus_Internal = 9,
} SgStatus;

/**
 * Opaque trained-model handle.
 */
typedef struct SgModel SgModel;

/**
 * Opaque scene handle.
 */
typedef struct SgScene SgScene;

/**
 * One recommended pose.
 */
typedef struct SgPose {
  double x;
  double y;
  double theta_a;
  double position_score;
  double orientation_score;
} SgPose;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *sg_last_error_message(void);

/**
 * Loads a model file. On success writes a handle the caller must release
 * with `sg_model_free`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SgStatus sg_model_load(const char *path, struct SgModel **out);

/**
 * # Safety
 * `model` must come from `sg_model_load` and not be freed twice.
 */
void sg_model_free(struct SgModel *model);

/**
 * Parses a scene JSON document into a handle released with `sg_scene_free`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SgStatus sg_scene_from_json(const char *json, struct SgScene **out);

/**
 * # Safety
 * `scene` must come from `sg_scene_from_json` and not be freed twice.
 */
void sg_scene_free(struct SgScene *scene);

/**
 * Number of objects in a scene; 0 for a null handle.
 *
 * # Safety
 * `scene` must be a live handle or null.
 */
uintptr_t sg_scene_object_count(const struct SgScene *scene);

/**
 * Recommends up to `*count` poses for `category`. On entry `*count` holds
 * the capacity of `poses`; on success it holds the number written, ranked
 * best first.
 *
 * # Safety
 * All pointers must be valid; `poses` must have capacity for `*count`
 * entries.
 */
enum SgStatus sg_place(const struct SgModel *model,
                       const struct SgScene *scene,
                       const char *category,
                       struct SgPose *poses,
                       uintptr_t *count);

/**
 * Serializes a heat map for `category` as a JSON document. The returned
 * string must be released with `sg_string_free`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SgStatus sg_heatmap_json(const struct SgModel *model,
                              const struct SgScene *scene,
                              const char *category,
                              char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void sg_string_free(char *s);

/**
 * Dataset identifier baked into the model; release with `sg_string_free`.
 *
 * # Safety
 * `model` must be a live handle.
 */
char *sg_model_dataset_id(const struct SgModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCENEGEN_H */
