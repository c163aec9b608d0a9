use std::path::PathBuf;
use std::process::Command;

fn header_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_dir().join("tvsbm.h")).unwrap();
    for name in [
        "tvsbm_last_error",
        "tvsbm_dataset_simulate",
        "tvsbm_dataset_load",
        "tvsbm_fit(",
        "tvsbm_fit_theta",
        "tvsbm_fuse",
        "tvsbm_project_shape",
        "tvsbm_hermite_rule",
        "typedef struct TvsbmFit TvsbmFit",
        "TVSBM_STATUS_EMPTY_INTERVAL = 4",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"tvsbm.h\"\n\
         int check(void) {\n\
           TvsbmFitOptions o = tvsbm_fit_options_default(10);\n\
           double v[3] = {1, 2, 3}, out[3];\n\
           TvsbmShape r;\n\
           return (int)tvsbm_project_shape(v, 3, TVSBM_SHAPE_AUTO, out, &r) + (int)o.intervals;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}
