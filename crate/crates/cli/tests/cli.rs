use std::path::PathBuf;
use std::process::{Command, Output};

fn flasep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flasep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flasep-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gradcheck_passes() {
    let out = flasep(&["gradcheck", "--config", "tiny"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("focused_linear_attention") && text.contains("sepnet"));
    assert!(!flasep(&["gradcheck", "--config", "huge"]).status.success());
}

#[test]
fn bench_run_and_slope() {
    let dir = scratch("bench");
    let csv = dir.join("results.csv");
    let out = flasep(&[
        "bench",
        "run",
        "--modes",
        "vla,fla",
        "--lens",
        "128,256,512",
        "--reps",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("mode,N,d,heads,reps,median_seconds,peak_elements\n"));
    assert_eq!(text.lines().count(), 1 + 6 + 2);

    let out = flasep(&["bench", "slope", "--in", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vla,SLOPE,") && text.contains("fla,SLOPE,"));
}

#[test]
fn failed_cells_set_the_exit_code() {
    let out = flasep(&[
        "bench",
        "run",
        "--modes",
        "softmax",
        "--lens",
        "512,1024",
        "--reps",
        "3",
        "--max-elements",
        "500000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("softmax,1024,32,4,3,FAILED,out-of-memory"),
        "{text}"
    );
}

#[test]
fn train_then_separate() {
    let dir = scratch("train");
    let model = dir.join("model.bin");
    let out = flasep(&[
        "train-toy",
        "--items",
        "1",
        "--steps",
        "2",
        "--len",
        "400",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout).unwrap().contains("SI-SNRi"));

    let mix = dir.join("mix.f32");
    let samples: Vec<u8> = (0..500)
        .flat_map(|i| ((i as f32 * 0.05).sin() * 0.5).to_le_bytes())
        .collect();
    std::fs::write(&mix, samples).unwrap();
    let (s1, s2) = (dir.join("s1.f32"), dir.join("s2.f32"));
    let out = flasep(&[
        "separate",
        "--model",
        model.to_str().unwrap(),
        "--in",
        mix.to_str().unwrap(),
        "--out1",
        s1.to_str().unwrap(),
        "--out2",
        s2.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::metadata(&s1).unwrap().len(), 2000);
    assert_eq!(std::fs::metadata(&s2).unwrap().len(), 2000);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let out = flasep(&[
        "separate",
        "--model",
        "/nonexistent/model.bin",
        "--in",
        "x",
        "--out1",
        "a",
        "--out2",
        "b",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
}
