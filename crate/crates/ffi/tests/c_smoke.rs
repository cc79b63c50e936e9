//! End-to-end check of the C ABI: compile a small C program against the
//! generated header and the static library, run it, and inspect its output.

use std::path::PathBuf;
use std::process::Command;

const C_SOURCE: &str = r#"
#include <stdio.h>
#include <math.h>
#include "starkprufer.h"

int main(void) {
    double airy[4];
    if (sp_airy(0.0, airy) != SP_STATUS_OK) return 1;
    if (fabs(airy[0] - 0.3550280538878172) > 1e-14) return 2;

    SpReference *ref = NULL;
    if (sp_reference_new(1.0, 0.0, 1.0, &ref) != SP_STATUS_OK) return 3;

    double z[4], ph[3];
    if (sp_zeta(ref, 50.0, z) != SP_STATUS_OK) return 4;
    if (sp_gamma_phase(ref, 50.0, ph) != SP_STATUS_OK) return 5;
    double abs2 = z[0]*z[0] + z[1]*z[1];
    if (fabs(abs2 * ph[1] - 1.0) > 1e-11) return 6;

    double run[2];
    if (sp_prufer_run(ref, 0.0, 2000, 0, 0, 0, 0, run) != SP_STATUS_OK) return 7;

    double w[2];
    if (sp_cubic_gauss_sum(1, 2, 0.0, 0.0, 1, 0, w) != SP_STATUS_OK) return 8;
    if (fabs(w[0]) > 1e-12 || fabs(w[1]) > 1e-12) return 9;

    sp_reference_free(ref);
    printf("gamma1(50) = %.12f\n", ph[1]);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    // target/<profile>/ holds the staticlib two levels up from the test exe
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let staticlib = profile_dir.join("libstarkprufer_ffi.a");
    if !staticlib.exists() {
        // cargo test alone may not have produced the staticlib artifact yet
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut build = Command::new(cargo);
        build.args(["build", "-p", "starkprufer-ffi"]);
        if profile_dir.file_name().map(|f| f == "release").unwrap_or(false) {
            build.arg("--release");
        }
        let status = build.status().expect("cargo build for staticlib");
        assert!(status.success() && staticlib.exists(), "staticlib unavailable");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler available; skipping ABI smoke test");
        return;
    }

    let dir = std::env::temp_dir().join(format!("sp_c_smoke_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_SOURCE).unwrap();

    let status = Command::new(&cc)
        .arg(&src)
        .arg(&staticlib)
        .arg(format!("-I{}", include_dir.display()))
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("compiler invocation");
    assert!(status.success(), "C compilation failed");

    let output = Command::new(&bin).output().expect("run smoke binary");
    assert!(
        output.status.success(),
        "smoke binary exited with {:?}: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout)
    );
    let text = String::from_utf8_lossy(&output.stdout);
    // gamma'(50) ~ sqrt(50) = 7.071...
    assert!(text.contains("gamma1(50) = 7.07"), "unexpected output: {text}");
    let _ = std::fs::remove_dir_all(&dir);
}
