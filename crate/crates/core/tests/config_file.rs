use franson::config::{dump_config, parse_config};
use franson::ExperimentConfig;

fn readme_config_block() -> String {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").expect("toml block") + "```toml\n".len();
    let len = readme[start..].find("```").unwrap();
    readme[start..start + len].to_string()
}

#[test]
fn documented_config_equals_defaults() {
    let parsed = parse_config(&readme_config_block()).unwrap();
    assert_eq!(parsed, ExperimentConfig::default());
    assert_eq!(parsed.hash(), ExperimentConfig::default().hash());
}

#[test]
fn dump_load_dump_is_byte_identical() {
    let once = dump_config(&ExperimentConfig::default());
    let twice = dump_config(&parse_config(&once).unwrap());
    assert_eq!(once, twice);
}
