use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "configcount.h"

int main(void) {
    int64_t pts[10] = {0, 0, 0, 0, 0, 1, 0, 0, 0, 0};
    CcSimplex *s = NULL;
    if (cc_simplex_new(5, 2, pts, 10, &s) != CC_STATUS_OK) return 1;
    uint64_t count = 0;
    if (cc_count_copies(s, 3, 1, &count) != CC_STATUS_OK) return 2;
    cc_simplex_free(s);
    double a, b;
    if (cc_sphere_decay(4, 1, &a, &b) != CC_STATUS_NOT_PRIME) return 3;
    char msg[128];
    if (cc_last_error_message(msg, sizeof msg) > sizeof msg) return 4;
    printf("%llu|%s\n", (unsigned long long)count, msg);
    return 0;
}
"#;

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let lib_dir = artifact_dir();
    if !lib_dir.join("libconfigcount_ffi.so").exists() {
        eprintln!("no shared library in {}, skipping", lib_dir.display());
        return;
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile_dir();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg(format!("-I{}", include.display()))
        .arg(format!("-L{}", lib_dir.display()))
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lconfigcount_ffi")
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "80|modulus 4 is not a prime >= 3");
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("configcount-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
