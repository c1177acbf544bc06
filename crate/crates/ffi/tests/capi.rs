use std::ffi::{CStr, CString};
use std::io::Cursor;
use std::process::Command;
use std::ptr;

use image::{ImageFormat, Rgb, RgbImage};
use mpeg7_annotate::bundle::ModelBundle;
use mpeg7_annotate::classifiers::{fit_nb, Classifier, LabeledDataset};
use mpeg7_annotate::descriptors::{extract_scd, EhdParams};
use mpeg7_annotate::descriptors::DescriptorKind;
use mpeg7_annotate::raster::decode_image;
use mpeg7_annotate_ffi::*;

fn png(color: [u8; 3]) -> Vec<u8> {
    let img = RgbImage::from_pixel(32, 32, Rgb(color));
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).unwrap();
    buf.into_inner()
}

/// Naive Bayes on SCD trained with one red and one blue example per class.
fn scd_bundle() -> ModelBundle {
    let red = extract_scd(&decode_image(&png([220, 10, 10])).unwrap()).unwrap();
    let blue = extract_scd(&decode_image(&png([10, 10, 220])).unwrap()).unwrap();
    let features = vec![red.values().to_vec(), blue.values().to_vec()];
    let data = LabeledDataset::new(features, vec![0, 1], vec!["red".into(), "blue".into()]).unwrap();
    ModelBundle {
        descriptor: DescriptorKind::Scd,
        pca: None,
        classifier: Classifier::NaiveBayes(fit_nb(&data).unwrap()),
        class_names: vec!["red".into(), "blue".into()],
        extraction: EhdParams::default(),
        training: None,
    }
}

fn load(bundle: &ModelBundle) -> *mut AnnModel {
    let json = CString::new(serde_json::to_string(bundle).unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { ann_model_from_json(json.as_ptr(), &mut model) }, AnnStatus::Ok);
    assert!(!model.is_null());
    model
}

fn last_error() -> String {
    let p = ann_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn model_metadata() {
    let model = load(&scd_bundle());
    unsafe {
        assert_eq!(ann_model_class_count(model), 2);
        assert_eq!(CStr::from_ptr(ann_model_class_name(model, 1)).to_str().unwrap(), "blue");
        assert!(ann_model_class_name(model, 2).is_null());
        assert_eq!(ann_model_input_dim(model), 256);
        let mut d = AnnDescriptor::Ehd;
        assert_eq!(ann_model_descriptor(model, &mut d), AnnStatus::Ok);
        assert_eq!(d, AnnDescriptor::Scd);
        ann_model_free(model);
        ann_model_free(ptr::null_mut());
        assert_eq!(ann_model_class_count(ptr::null()), 0);
    }
}

#[test]
fn predicts_encoded_images() {
    let model = load(&scd_bundle());
    for (color, expected) in [([200, 30, 30], 0), ([30, 30, 200], 1)] {
        let bytes = png(color);
        let (mut label, mut conf) = (9usize, -1.0);
        let s = unsafe { ann_model_predict_image(model, bytes.as_ptr(), bytes.len(), &mut label, &mut conf) };
        assert_eq!(s, AnnStatus::Ok);
        assert_eq!(label, expected);
        assert!((0.5..=1.0).contains(&conf));
    }
    unsafe { ann_model_free(model) };
}

#[test]
fn predicts_files_and_features() {
    let model = load(&scd_bundle());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.png");
    std::fs::write(&path, png([10, 10, 220])).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut label = 9usize;
    unsafe {
        assert_eq!(ann_model_predict_file(model, cpath.as_ptr(), &mut label, ptr::null_mut()), AnnStatus::Ok);
        assert_eq!(label, 1);

        let mut v = vec![0.0; 256];
        let bytes = png([220, 10, 10]);
        assert_eq!(
            ann_extract_image(AnnDescriptor::Scd, bytes.as_ptr(), bytes.len(), v.as_mut_ptr(), v.len()),
            AnnStatus::Ok
        );
        assert_eq!(v[0], 1.0);
        assert_eq!(ann_model_predict_features(model, v.as_ptr(), v.len(), &mut label, ptr::null_mut()), AnnStatus::Ok);
        assert_eq!(label, 0);

        let s = ann_model_predict_features(model, v.as_ptr(), 255, &mut label, ptr::null_mut());
        assert_eq!(s, AnnStatus::DimensionMismatch);
        assert!(last_error().contains("256"));
        ann_model_free(model);
    }
}

#[test]
fn error_codes() {
    let missing = CString::new("/nonexistent/model.json").unwrap();
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(ann_model_load(missing.as_ptr(), &mut model), AnnStatus::Io);
        assert!(model.is_null());
        assert_eq!(ann_model_load(ptr::null(), &mut model), AnnStatus::NullArgument);
        let bad = CString::new("{not json").unwrap();
        assert_eq!(ann_model_from_json(bad.as_ptr(), &mut model), AnnStatus::Format);
        assert!(!last_error().is_empty());

        let junk = [0u8, 1, 2, 3];
        let mut out = [0.0; 80];
        let s = ann_extract_image(AnnDescriptor::Ehd, junk.as_ptr(), junk.len(), out.as_mut_ptr(), out.len());
        assert_eq!(s, AnnStatus::Decode);
        let s = ann_extract_image(AnnDescriptor::CldRaw, junk.as_ptr(), junk.len(), out.as_mut_ptr(), out.len());
        assert_eq!(s, AnnStatus::BufferTooSmall);

        let tiny = {
            let mut buf = Cursor::new(Vec::new());
            RgbImage::new(7, 7).write_to(&mut buf, ImageFormat::Png).unwrap();
            buf.into_inner()
        };
        let s = ann_extract_image(AnnDescriptor::Ehd, tiny.as_ptr(), tiny.len(), out.as_mut_ptr(), out.len());
        assert_eq!(s, AnnStatus::ImageTooSmall);
    }
    let mut label = 0usize;
    let v = [0.0; 80];
    let s = unsafe { ann_model_predict_features(ptr::null(), v.as_ptr(), v.len(), &mut label, ptr::null_mut()) };
    assert_eq!(s, AnnStatus::NullArgument);
}

#[test]
fn success_clears_last_error() {
    let mut model = ptr::null_mut();
    unsafe { ann_model_load(ptr::null(), &mut model) };
    assert!(!ann_last_error().is_null());
    assert_eq!(ann_descriptor_dim(AnnDescriptor::CldRaw), 192);
    let model = load(&scd_bundle());
    assert!(ann_last_error().is_null());
    unsafe { ann_model_free(model) };
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(ann_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/annotate.h")).unwrap();
    for name in [
        "typedef struct AnnModel AnnModel;",
        "ANN_STATUS_OK = 0",
        "ann_model_load",
        "ann_model_predict_image",
        "ann_extract_image",
        "ann_last_error",
        "size_t ann_descriptor_dim",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"annotate.h\"\n\
         int main(void) { AnnModel *m = 0; size_t label; double c;\n\
         AnnStatus s = ann_model_predict_features(m, 0, 0, &label, &c);\n\
         return s == ANN_STATUS_OK ? 0 : (int)ann_descriptor_dim(ANN_DESCRIPTOR_EHD); }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
