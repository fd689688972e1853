//! Builds a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "dissoc.h"

int main(void) {
    DissocExpr *e = NULL;
    if (dissoc_expr_parse("x1&x3|x1&x4|x2&x4", &e) != DISSOC_STATUS_OK) return 10;
    DissocProbs *p = NULL;
    if (dissoc_probs_parse("x1 = 1/2\nx2 = 1/2\nx3 = 1/2\nx4 = 1/2\n", &p) != DISSOC_STATUS_OK) return 11;

    DissocBoundSummary s;
    char *text = NULL;
    if (dissoc_bound(e, "x4", DISSOC_DIRECTION_UPPER, p, &s, &text) != DISSOC_STATUS_OK) return 12;
    printf("%s n=%zu exact=%d\n", text, s.n, s.is_exact);
    dissoc_string_free(text);

    DissocExpr *bad = NULL;
    if (dissoc_expr_parse("x &", &bad) != DISSOC_STATUS_PARSE_ERROR) return 13;
    if (dissoc_last_error() == NULL || strstr(dissoc_last_error(), "syntax") == NULL) return 14;

    dissoc_probs_free(p);
    dissoc_expr_free(e);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<this test>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler `{cc}`");
        return;
    }
    let lib = target_dir().join("libdissoc_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "exact=1/2 bound=17/32 n=2 exact=1\n");
}
