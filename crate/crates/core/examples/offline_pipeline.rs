//! The whole pipeline through the command-line entry point, in a temporary
//! directory and without any network service.

fn main() {
    let dir = std::env::temp_dir().join(format!("scenelang-demo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "synth".into(),
            "--objects".into(),
            "40".into(),
            "--out".into(),
            p("data"),
        ],
        vec![
            "parse".into(),
            "--scene".into(),
            p("data/scene.json"),
            "--priors".into(),
            p("data/priors.json"),
            "--out".into(),
            p("graph.json"),
        ],
        vec![
            "describe".into(),
            "--scene".into(),
            p("data/scene.json"),
            "--graph".into(),
            p("graph.json"),
            "--candidates".into(),
            p("data/candidates.json"),
            "--out".into(),
            p("info.json"),
        ],
        vec![
            "reflect".into(),
            "--scene".into(),
            p("data/scene.json"),
            "--info".into(),
            p("info.json"),
            "--out".into(),
            p("refined.json"),
        ],
        vec![
            "select".into(),
            "--info".into(),
            p("refined.json"),
            "--scene".into(),
            p("data/scene.json"),
            "--question".into(),
            "Where is the nearest chair?".into(),
            "--out".into(),
            p("selection.json"),
        ],
        vec![
            "eval".into(),
            "--info".into(),
            p("refined.json"),
            "--references".into(),
            p("data/references.json"),
        ],
    ];
    for args in steps {
        let code = scenelang::pipeline::run(std::iter::once("scenelang".to_string()).chain(args));
        if code != 0 {
            std::process::exit(code);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}
