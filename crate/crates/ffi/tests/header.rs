use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/franson.h");

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(HEADER).expect("header generated by build script");
    for symbol in [
        "typedef struct FransonConfig FransonConfig;",
        "FRANSON_STATUS_OK = 0",
        "franson_config_new_default",
        "franson_config_load",
        "franson_config_free",
        "franson_last_error_message",
        "franson_simulate_setting",
        "franson_scan_fit",
        "franson_chsh",
        "FransonCountSummary",
    ] {
        assert!(text.contains(symbol), "missing `{symbol}`");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"franson.h\"\nint main(void) { FransonConfig *c = franson_config_new_default(); franson_config_free(c); return 0; }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        if Command::new(compiler).arg("--version").output().is_err() {
            continue;
        }
        let status = Command::new(compiler)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(include)
            .arg(&src)
            .status()
            .unwrap();
        assert!(status.success(), "{compiler} rejected the header");
    }
}
