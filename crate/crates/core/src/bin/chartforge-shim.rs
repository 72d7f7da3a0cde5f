//! Desk shim: `chartforge-shim [--python] SCRIPT DATA OUT`.
//!
//! Bank programs (recognised by their directive line) are rendered natively;
//! anything else, or everything with `--python`, is run as
//! `python3 SCRIPT DATA OUT`. Exit status: 0 on success, 1 when rendering
//! fails or produces no image, 2 on bad usage or unreadable inputs.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use chartforge::forge::bank::parse_directive;
use chartforge::raster::render_bank;

fn usage(msg: &str) -> ExitCode {
    eprintln!("chartforge-shim: {msg}");
    eprintln!("usage: chartforge-shim [--python] SCRIPT DATA OUT");
    ExitCode::from(2)
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("chartforge-shim: {msg}");
    ExitCode::from(1)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let force_python = args.first().is_some_and(|a| a == "--python");
    if force_python {
        args.remove(0);
    }
    let [script, data, out] = args.as_slice() else {
        return usage("expected exactly three arguments");
    };
    let source = match std::fs::read_to_string(script) {
        Ok(s) => s,
        Err(e) => return usage(&format!("cannot read script {script}: {e}")),
    };
    let data_text = match std::fs::read_to_string(data) {
        Ok(s) => s,
        Err(e) => return usage(&format!("cannot read data {data}: {e}")),
    };
    let out = Path::new(out);

    match parse_directive(&source).filter(|_| !force_python) {
        Some(directive) => {
            let payload: serde_json::Value = match serde_json::from_str(&data_text) {
                Ok(v) => v,
                Err(e) => return fail(&format!("data is not valid JSON: {e}")),
            };
            let rendered = render_bank(&directive.chart_type, &directive.style, &payload);
            if let Err(e) = rendered
                .image
                .save_with_format(out, image::ImageFormat::Png)
            {
                return fail(&format!("cannot write {}: {e}", out.display()));
            }
            if let Err(e) = std::fs::write(sidecar(out), rendered.sidecar()) {
                return fail(&format!("cannot write sidecar: {e}"));
            }
        }
        None => {
            let status = Command::new("python3")
                .arg(script)
                .arg(data)
                .arg(out)
                .status();
            match status {
                Ok(s) if s.success() => {}
                Ok(s) => return fail(&format!("script exited with {s}")),
                Err(e) => return fail(&format!("cannot start python3: {e}")),
            }
        }
    }
    if !out.is_file() {
        return fail("script produced no image");
    }
    ExitCode::SUCCESS
}
