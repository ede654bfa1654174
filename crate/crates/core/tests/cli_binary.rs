use std::process::Command;

fn trapfactor(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_trapfactor"))
        .args(args)
        .env("TRAPFACTOR_PRECISION_CAP_BITS", "8192")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn exit_codes() {
    let (code, out, _) = trapfactor(&["factor", "8051", "--method", "fermat", "--max-steps", "50"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"factors\":[\"83\",\"97\"]") && out.contains("\"steps\":1"));

    let (code, _, _) = trapfactor(&["factor", "97", "--method", "fermat", "--max-steps", "10"]);
    assert_eq!(code, 1);

    let (code, _, err) = trapfactor(&["factor", "8051", "--method", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("nope"));

    let (code, out, _) = trapfactor(&["scan", "1027", "--order", "2", "--s", "1/1", "--k-range", "-5..0"]);
    assert_eq!((code, out.as_str()), (0, "{\"k\":-2,\"x\":\"13\",\"divisor\":\"13\"}\n"));
}

#[test]
fn big_integers_are_strings() {
    let (code, out, _) = trapfactor(&["factor", "4294967297", "--method", "lehman"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["factors"], serde_json::json!(["641", "6700417"]));
    assert!(v["n"].is_string());
    assert!(v["multiplier"].is_string() || v["multiplier"].is_null());
}

#[test]
fn fermat_number_filter_from_the_command_line() {
    let (code, out, _) = trapfactor(&[
        "scan",
        "4294967297",
        "--k-range",
        "0..6569986",
        "--fermat-index",
        "5",
        "--parity",
        "even",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "{\"k\":6569986,\"x\":\"641\",\"divisor\":\"641\"}\n{\"k\":6569986,\"x\":\"6700417\",\"divisor\":\"6700417\"}\n");
}
