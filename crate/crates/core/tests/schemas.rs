//! Shipped schemas against the shipped example files.
//!
//! Only a structural subset is checked: known keys, required keys and enum
//! membership. The serde types remain the authority at run time.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use chargecav::cli::{Loaded, Scenario};
use chargecav::device::DeviceModel;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn load(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

/// Checks `value` against an object schema's `properties`, `required` and
/// `additionalProperties: false`, recursing into local `$ref`s and property
/// enums.
fn check_object(value: &Value, schema: &Value, defs: &Map<String, Value>, at: &str) {
    let schema = resolve(schema, defs);
    let obj = value.as_object().unwrap_or_else(|| panic!("{at}: expected object"));
    let props = schema["properties"].as_object().cloned().unwrap_or_default();
    if let Some(req) = schema["required"].as_array() {
        for r in req {
            assert!(obj.contains_key(r.as_str().unwrap()), "{at}: missing {r}");
        }
    }
    for (k, v) in obj {
        let Some(p) = props.get(k) else {
            assert!(
                schema["additionalProperties"] != Value::Bool(false),
                "{at}: unknown key {k}"
            );
            continue;
        };
        let p = resolve(p, defs);
        if let Some(choices) = p["enum"].as_array() {
            assert!(choices.contains(v), "{at}.{k}: {v} not in {choices:?}");
        }
        if p["type"] == "object" && p.get("properties").is_some() && p.get("oneOf").is_none() {
            check_object(v, p, defs, &format!("{at}.{k}"));
        }
        if let (Some(items), Some(arr)) = (p.get("items"), v.as_array()) {
            let items = resolve(items, defs);
            if items.get("properties").is_some() {
                for (i, x) in arr.iter().enumerate() {
                    check_object(x, items, defs, &format!("{at}.{k}[{i}]"));
                }
            }
        }
    }
}

fn resolve<'a>(schema: &'a Value, defs: &'a Map<String, Value>) -> &'a Value {
    match schema["$ref"].as_str().and_then(|r| r.strip_prefix("#/$defs/")) {
        Some(name) => &defs[name],
        None => schema,
    }
}

fn defs(schema: &Value) -> Map<String, Value> {
    schema["$defs"].as_object().cloned().unwrap_or_default()
}

#[test]
fn schemas_are_json_with_draft_and_id() {
    for p in json_files(&root().join("schemas")) {
        let s = load(&p);
        assert!(
            s["$schema"].as_str().unwrap().contains("json-schema.org"),
            "{}",
            p.display()
        );
        let name = p.file_name().unwrap().to_str().unwrap();
        assert_eq!(s["$id"], name);
    }
}

#[test]
fn shipped_devices_match_schema_and_parse() {
    let schema = load(&root().join("schemas/device.schema.json"));
    let d = defs(&schema);
    for p in json_files(&root().join("scenarios/devices")) {
        let v = load(&p);
        check_object(&v, &schema, &d, &p.display().to_string());
        DeviceModel::from_path(&p).unwrap();
    }
}

#[test]
fn shipped_scenarios_match_schema_and_parse() {
    let schema = load(&root().join("schemas/scenario.schema.json"));
    let schedule = load(&root().join("schemas/schedule.schema.json"));
    let d = defs(&schema);
    let mut seen = 0;
    for p in json_files(&root().join("scenarios")) {
        let v = load(&p);
        let at = p.display().to_string();
        check_object(&v, &schema, &d, &at);
        let kind = v["kind"].as_str().unwrap().to_string();
        check_object(&v["params"], &d[kind.as_str()], &d, &format!("{at}.params"));
        if let Some(s) = v["params"].get("schedule") {
            check_object(s, &schedule, &defs(&schedule), &format!("{at}.params.schedule"));
        }
        let parsed: Scenario = serde_json::from_value(v).unwrap();
        assert_eq!(serde_json::to_value(parsed.kind).unwrap(), kind);
        Loaded::from_path(&p).unwrap_or_else(|e| panic!("{at}: {e}"));
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn checker_rejects_unknown_keys() {
    let schema = load(&root().join("schemas/device.schema.json"));
    let d = defs(&schema);
    let bad: Value = serde_json::json!({"qubits": [], "cavity": {"nu": 1.0, "g": 0.1, "n_ph": 2, "loss": 1.0}});
    let r = std::panic::catch_unwind(|| check_object(&bad, &schema, &d, "bad"));
    assert!(r.is_err());
}
