//! C ABI for the scene augmentation engine. Handles are opaque pointers;
//! every fallible call returns an `SgStatus` and stores a human-readable
//! message retrievable with `sg_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use scenegen_core::augment::{place, SamplingSpec};
use scenegen_core::dataset::SceneRecord;
use scenegen_core::error::SceneGenError;
use scenegen_core::knowledge::{format, KnowledgeModel};
use scenegen_core::scene::{Category, Scene};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScene = 3,
    UnknownCategory = 4,
    UntrainedCategory = 5,
    ModelFormat = 6,
    NoValidCell = 7,
    Io = 8,
    Internal = 9,
}

/// Opaque trained-model handle.
pub struct SgModel {
    inner: KnowledgeModel,
}

/// Opaque scene handle.
pub struct SgScene {
    inner: Scene,
}

/// One recommended pose.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgPose {
    pub x: f64,
    pub y: f64,
    pub theta_a: f64,
    pub position_score: f64,
    pub orientation_score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(e: &SceneGenError) -> SgStatus {
    match e {
        SceneGenError::UnknownCategory(_) => SgStatus::UnknownCategory,
        SceneGenError::UntrainedCategory(_) => SgStatus::UntrainedCategory,
        SceneGenError::InvalidScene(_) | SceneGenError::Contract(_) => SgStatus::InvalidScene,
        SceneGenError::FormatVersion { .. }
        | SceneGenError::Checksum
        | SceneGenError::Truncated(_) => SgStatus::ModelFormat,
        SceneGenError::NoValidCell { .. } => SgStatus::NoValidCell,
        SceneGenError::Io(_) => SgStatus::Io,
        SceneGenError::Json(_) => SgStatus::InvalidScene,
        _ => SgStatus::Internal,
    }
}

fn fail(e: SceneGenError) -> SgStatus {
    set_error(&e.to_string());
    status_of(&e)
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, SgStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(SgStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SgStatus::InvalidUtf8
    })
}

/// Message for the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a model file. On success writes a handle the caller must release
/// with `sg_model_free`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_model_load(path: *const c_char, out: *mut *mut SgModel) -> SgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return SgStatus::NullArgument;
    }
    let path = match cstr(path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match format::load(Path::new(path)) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(SgModel { inner: model }));
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `model` must come from `sg_model_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_model_free(model: *mut SgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parses a scene JSON document into a handle released with `sg_scene_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_from_json(
    json: *const c_char,
    out: *mut *mut SgScene,
) -> SgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return SgStatus::NullArgument;
    }
    let text = match cstr(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let scene = SceneRecord::from_json(text).and_then(|r| r.to_scene());
    match scene {
        Ok(scene) => {
            *out = Box::into_raw(Box::new(SgScene { inner: scene }));
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `scene` must come from `sg_scene_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_free(scene: *mut SgScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of objects in a scene; 0 for a null handle.
///
/// # Safety
/// `scene` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_object_count(scene: *const SgScene) -> usize {
    scene.as_ref().map_or(0, |s| s.inner.objects.len())
}

/// Recommends up to `*count` poses for `category`. On entry `*count` holds
/// the capacity of `poses`; on success it holds the number written, ranked
/// best first.
///
/// # Safety
/// All pointers must be valid; `poses` must have capacity for `*count`
/// entries.
#[no_mangle]
pub unsafe extern "C" fn sg_place(
    model: *const SgModel,
    scene: *const SgScene,
    category: *const c_char,
    poses: *mut SgPose,
    count: *mut usize,
) -> SgStatus {
    let (Some(model), Some(scene)) = (model.as_ref(), scene.as_ref()) else {
        set_error("null model or scene handle");
        return SgStatus::NullArgument;
    };
    if poses.is_null() || count.is_null() {
        set_error("null poses or count pointer");
        return SgStatus::NullArgument;
    }
    let name = match cstr(category) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let category = match Category::from_name(name) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let mut spec = SamplingSpec::default();
    spec.top_k = *count;
    match place(&scene.inner, category, &model.inner, &spec, &model.inner.thresholds, None) {
        Ok((rec, _)) => {
            let n = rec.poses.len().min(*count);
            for (i, p) in rec.poses.iter().take(n).enumerate() {
                *poses.add(i) = SgPose {
                    x: p.position.x,
                    y: p.position.y,
                    theta_a: p.theta_a,
                    position_score: p.position_score,
                    orientation_score: p.orientation_score,
                };
            }
            *count = n;
            SgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serializes a heat map for `category` as a JSON document. The returned
/// string must be released with `sg_string_free`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sg_heatmap_json(
    model: *const SgModel,
    scene: *const SgScene,
    category: *const c_char,
    out: *mut *mut c_char,
) -> SgStatus {
    let (Some(model), Some(scene)) = (model.as_ref(), scene.as_ref()) else {
        set_error("null model or scene handle");
        return SgStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null out pointer");
        return SgStatus::NullArgument;
    }
    let name = match cstr(category) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let category = match Category::from_name(name) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let spec = SamplingSpec::default();
    let map = match scenegen_core::augment::position_heatmap(
        &scene.inner,
        category,
        &model.inner,
        &spec,
        &model.inner.thresholds,
        None,
    ) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let doc = serde_json::json!({
        "schema_version": scenegen_core::dataset::SCHEMA_VERSION,
        "heatmap": map,
    });
    match CString::new(doc.to_string()) {
        Ok(s) => {
            *out = s.into_raw();
            SgStatus::Ok
        }
        Err(_) => {
            set_error("serialized document contained NUL");
            SgStatus::Internal
        }
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Dataset identifier baked into the model; release with `sg_string_free`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_model_dataset_id(model: *const SgModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => CString::new(m.inner.dataset_id.replace('\0', " "))
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scenegen_core::dataset::{synthesize, SynthRuleSet};
    use scenegen_core::geometry::Thresholds;
    use scenegen_core::knowledge::{train, FeatureSelection};

    fn fixture() -> (tempfile::TempDir, CString, CString) {
        let dir = tempfile::tempdir().unwrap();
        let (scenes, _) = synthesize(&SynthRuleSet::combined(), 10, 21).unwrap();
        let (model, _) =
            train(&scenes, &Thresholds::default(), &FeatureSelection::default(), "ffi-fixture")
                .unwrap();
        let model_path = dir.path().join("model.sgm");
        format::save(&model, &model_path).unwrap();
        let path = CString::new(model_path.to_str().unwrap()).unwrap();
        let scene_json =
            CString::new(SceneRecord::from_scene(&scenes[0]).to_json().unwrap()).unwrap();
        (dir, path, scene_json)
    }

    #[test]
    fn load_place_and_free() {
        let (_dir, path, scene_json) = fixture();
        unsafe {
            let mut model: *mut SgModel = ptr::null_mut();
            assert_eq!(sg_model_load(path.as_ptr(), &mut model), SgStatus::Ok);
            let mut scene: *mut SgScene = ptr::null_mut();
            assert_eq!(sg_scene_from_json(scene_json.as_ptr(), &mut scene), SgStatus::Ok);
            assert!(sg_scene_object_count(scene) > 0);

            let category = CString::new("Storage").unwrap();
            let mut poses = [SgPose {
                x: 0.0,
                y: 0.0,
                theta_a: 0.0,
                position_score: 0.0,
                orientation_score: 0.0,
            }; 5];
            let mut count = poses.len();
            assert_eq!(
                sg_place(model, scene, category.as_ptr(), poses.as_mut_ptr(), &mut count),
                SgStatus::Ok
            );
            assert!(count >= 1);
            assert_eq!(poses[0].position_score, 1.0);

            let id = sg_model_dataset_id(model);
            assert_eq!(CStr::from_ptr(id).to_str().unwrap(), "ffi-fixture");
            sg_string_free(id);

            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(
                sg_heatmap_json(model, scene, category.as_ptr(), &mut json),
                SgStatus::Ok
            );
            let text = CStr::from_ptr(json).to_str().unwrap();
            assert!(text.contains("\"heatmap\""));
            sg_string_free(json);

            sg_scene_free(scene);
            sg_model_free(model);
        }
    }

    #[test]
    fn error_paths_set_message() {
        let (_dir, path, scene_json) = fixture();
        unsafe {
            let mut model: *mut SgModel = ptr::null_mut();
            assert_eq!(sg_model_load(path.as_ptr(), &mut model), SgStatus::Ok);
            let mut scene: *mut SgScene = ptr::null_mut();
            assert_eq!(sg_scene_from_json(scene_json.as_ptr(), &mut scene), SgStatus::Ok);

            let bad = CString::new("Lamp").unwrap();
            let mut poses = [SgPose {
                x: 0.0,
                y: 0.0,
                theta_a: 0.0,
                position_score: 0.0,
                orientation_score: 0.0,
            }; 1];
            let mut count = poses.len();
            assert_eq!(
                sg_place(model, scene, bad.as_ptr(), poses.as_mut_ptr(), &mut count),
                SgStatus::UnknownCategory
            );
            let msg = CStr::from_ptr(sg_last_error_message()).to_str().unwrap();
            assert!(msg.contains("Lamp"));

            let untrained = CString::new("Bed").unwrap();
            let mut count = poses.len();
            assert_eq!(
                sg_place(model, scene, untrained.as_ptr(), poses.as_mut_ptr(), &mut count),
                SgStatus::UntrainedCategory
            );

            let garbage = CString::new("not json").unwrap();
            let mut s2: *mut SgScene = ptr::null_mut();
            assert_eq!(sg_scene_from_json(garbage.as_ptr(), &mut s2), SgStatus::InvalidScene);

            let missing = CString::new("/nonexistent/model.sgm").unwrap();
            let mut m2: *mut SgModel = ptr::null_mut();
            assert_eq!(sg_model_load(missing.as_ptr(), &mut m2), SgStatus::Io);

            sg_scene_free(scene);
            sg_model_free(model);
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut model: *mut SgModel = ptr::null_mut();
            assert_eq!(sg_model_load(ptr::null(), &mut model), SgStatus::NullArgument);
            assert_eq!(sg_scene_object_count(ptr::null()), 0);
            sg_model_free(ptr::null_mut());
            sg_scene_free(ptr::null_mut());
            sg_string_free(ptr::null_mut());
        }
    }
}
