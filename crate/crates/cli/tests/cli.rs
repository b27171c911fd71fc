mod support;

use pidinst::{canonicalize, parse_record};
use support::*;

#[test]
fn validate_exit_codes() {
    let ok = run(&[fixture("bodc-sbe37.pidinst"), fixture("hzb-e2.pidinst")]
        .iter()
        .map(|p| p.as_os_str())
        .fold(vec!["validate".as_ref()], |mut v, p| {
            v.push(p);
            v
        }));
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("bodc-sbe37.pidinst: 0 error(s), 1 warning(s)"), "{}", stdout(&ok));

    let dir = tempfile::tempdir().unwrap();
    let mut rec = parse_record(&fixture_text("bodc-sbe37.pidinst")).unwrap();
    rec.name = None;
    let nameless = dir.path().join("nameless.pidinst");
    std::fs::write(&nameless, canonicalize(&rec)).unwrap();
    let out = run(&["validate".as_ref(), nameless.as_os_str(), "--format".as_ref(), "json".as_ref()]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let violations = report[0]["violations"].as_array().unwrap();
    assert!(violations
        .iter()
        .any(|v| v["code"] == "MissingMandatory" && v["path"] == "name"), "{report}");

    let broken = dir.path().join("broken.pidinst");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(code(&run(&["validate".as_ref(), broken.as_os_str()])), 2);
    assert_eq!(code(&run(&["validate", "/nonexistent/record.pidinst"])), 2);
}

#[test]
fn convert_handle_matches_golden() {
    let out = run(&["convert".as_ref(), fixture("bodc-sbe37.pidinst").as_os_str(), "--to".as_ref(), "handle".as_ref()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), fixture_text("bodc-sbe37.handle"));
}

#[test]
fn convert_datacite() {
    let hzb = fixture("hzb-e2.pidinst");
    let out = pidinst()
        .args(["convert".as_ref(), hzb.as_os_str()])
        .args(["--to", "datacite-json", "--publication-year", "2019"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), fixture_text("hzb-e2.datacite"));

    let xml = pidinst()
        .args(["convert".as_ref(), hzb.as_os_str()])
        .args(["--to", "datacite-xml", "--publication-year", "2019"])
        .output()
        .unwrap();
    assert_eq!(code(&xml), 0);
    let text = stdout(&xml);
    assert!(text.contains("<identifier identifierType=\"DOI\">10.5442/NI000001</identifier>"), "{text}");
    assert!(text.contains("<publicationYear>2019</publicationYear>"));

    // No year given and no dates in the record: the clock decides, with a note.
    let fallback = run(&["convert".as_ref(), hzb.as_os_str(), "--to".as_ref(), "datacite-json".as_ref()]);
    assert_eq!(code(&fallback), 0);
    assert!(String::from_utf8_lossy(&fallback.stderr).contains("--publication-year"));
}

#[test]
fn convert_canonical_is_idempotent() {
    let out = run(&["convert".as_ref(), fixture("bodc-sbe37.pidinst").as_os_str(), "--to".as_ref(), "canonical".as_ref()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), fixture_text("bodc-sbe37.pidinst"));
}

#[test]
fn convert_refuses_invalid_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut rec = parse_record(&fixture_text("bodc-sbe37.pidinst")).unwrap();
    rec.owners.clear();
    let path = dir.path().join("ownerless.pidinst");
    std::fs::write(&path, canonicalize(&rec)).unwrap();
    let out = run(&["convert".as_ref(), path.as_os_str(), "--to".as_ref(), "handle".as_ref()]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn graph_commands() {
    let eiscat = fixture("corpus/eiscat");
    let edges = run(&["graph".as_ref(), "build".as_ref(), eiscat.as_os_str()]);
    assert_eq!(code(&edges), 0);
    assert_eq!(stdout(&edges).lines().count(), 3);

    let radar = run(&["graph".as_ref(), "neighbors".as_ref(), eiscat.as_os_str(), "21.T11998/EISCAT-RADAR".as_ref()]);
    assert_eq!(code(&radar), 0, "{}", String::from_utf8_lossy(&radar.stderr));
    let lines: Vec<String> = stdout(&radar).lines().map(str::to_string).collect();
    assert_eq!(
        lines,
        ["RX-1", "RX-2", "TX-1"]
            .map(|u| format!("21.T11998/EISCAT-RADAR\tHasComponent\t21.T11998/EISCAT-{u}"))
    );

    let inverse = pidinst()
        .args(["graph".as_ref(), "neighbors".as_ref(), eiscat.as_os_str()])
        .args(["http://hdl.handle.net/21.T11998/EISCAT-TX-1", "--direction", "in"])
        .output()
        .unwrap();
    assert_eq!(stdout(&inverse).lines().count(), 1);

    let dangling = run(&["graph".as_ref(), "dangling".as_ref(), eiscat.as_os_str()]);
    assert_eq!((code(&dangling), stdout(&dangling)), (0, String::new()));

    let hzb = run(&["graph".as_ref(), "dangling".as_ref(), fixture("corpus/hzb").as_os_str()]);
    assert_eq!(stdout(&hzb), "10.17815/jlsrf-4-110\n");

    let empty = run(&["graph".as_ref(), "build".as_ref(), fixture("corpus/empty").as_os_str()]);
    assert_eq!((code(&empty), stdout(&empty)), (0, String::new()));

    let unknown = run(&["graph".as_ref(), "neighbors".as_ref(), eiscat.as_os_str(), "21.T11998/NOPE".as_ref()]);
    assert_eq!(code(&unknown), 1);
}

#[test]
fn sensorml_commands() {
    let listing = run(&["sensorml".as_ref(), "extract".as_ref(), fixture("sensorml-listing1.xml").as_os_str()]);
    assert_eq!(code(&listing), 0);
    assert_eq!(stdout(&listing), "21.T11998/0000-001A-3904-0\n");

    let none = run(&["sensorml".as_ref(), "extract".as_ref(), fixture("sensorml-min.xml").as_os_str()]);
    assert_eq!(code(&none), 1);

    let dir = tempfile::tempdir().unwrap();
    let embedded = dir.path().join("embedded.xml");
    let out = pidinst()
        .args(["sensorml".as_ref(), "embed".as_ref(), fixture("sensorml-min.xml").as_os_str()])
        .args(["--pid", "21.T11998/0000-001A-3904-0", "-o"])
        .arg(&embedded)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&embedded).unwrap(), fixture_text("sensorml-listing1.xml"));

    let conflict = pidinst()
        .args(["sensorml".as_ref(), "embed".as_ref(), embedded.as_os_str()])
        .args(["--pid", "21.T11998/0000-0000-0001"])
        .output()
        .unwrap();
    assert_eq!(code(&conflict), 1);
    let replaced = pidinst()
        .args(["sensorml".as_ref(), "embed".as_ref(), embedded.as_os_str()])
        .args(["--pid", "21.T11998/0000-0000-0001", "--replace"])
        .output()
        .unwrap();
    assert_eq!(code(&replaced), 0);
    assert!(stdout(&replaced).contains("http://hdl.handle.net/21.T11998/0000-0000-0001"));

    let garbage = dir.path().join("garbage.xml");
    std::fs::write(&garbage, "<sml:PhysicalSystem><oops></sml:PhysicalSystem>").unwrap();
    assert_eq!(code(&run(&["sensorml".as_ref(), "extract".as_ref(), garbage.as_os_str()])), 2);
}

#[test]
fn registry_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(&registry_config(dir.path(), "api_token = \"s3cret\"\n"));
    let with = |args: &[&std::ffi::OsStr], token: Option<&str>| {
        let mut cmd = pidinst();
        cmd.env("PIDINST_REGISTRY_URL", &server.url).args(args);
        if let Some(t) = token {
            cmd.args(["--token", t]);
        }
        cmd.output().unwrap()
    };
    let bodc = fixture("bodc-sbe37.pidinst");

    let denied = with(&["mint".as_ref(), bodc.as_os_str()], None);
    assert_eq!(code(&denied), 2);

    let minted = with(&["mint".as_ref(), bodc.as_os_str()], Some("s3cret"));
    assert_eq!(code(&minted), 0, "{}", String::from_utf8_lossy(&minted.stderr));
    let pid = stdout(&minted).trim().to_string();
    assert_eq!(pid, "21.T11998/0000-0000-0001");

    let resolved = with(&["resolve".as_ref(), pid.as_ref()], None);
    assert_eq!(stdout(&resolved), "https://linkedsystems.uk/system/instance/TOOL0022_2490/current/\n");
    let record = with(&["resolve".as_ref(), format!("http://hdl.handle.net/{pid}").as_ref(), "--noredirect".as_ref()], None);
    assert_eq!(code(&record), 0);
    assert!(stdout(&record).contains("\"handle\": \"21.T11998/0000-0000-0001\""));

    assert_eq!(code(&with(&["tombstone".as_ref(), pid.as_ref()], Some("s3cret"))), 0);
    let gone = with(&["resolve".as_ref(), pid.as_ref()], None);
    assert_eq!(code(&gone), 1);
    assert!(stdout(&gone).contains("Sea-Bird SBE 37-IM"));
    assert_eq!(code(&with(&["tombstone".as_ref(), pid.as_ref()], Some("s3cret"))), 1);
    assert_eq!(code(&with(&["resolve".as_ref(), "21.T11998/unknown".as_ref()], None)), 1);
    server.stop();
}

#[test]
fn registry_errors_are_environmental() {
    let out = run(&["resolve", "21.T11998/0000-0000-0001"]);
    assert_eq!(code(&out), 2);
    let out = pidinst()
        .args(["--registry-url", "http://127.0.0.1:9", "resolve", "21.T11998/0000-0000-0001"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn check_reports_unreachable_pages() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(&registry_config(dir.path(), ""));
    let mut rec = parse_record(&fixture_text("hzb-e2.pidinst")).unwrap();
    // The registry answers 302 on its resolver route, 404 elsewhere.
    rec.landing_page = Some(format!("{}/api/v1/instruments?limit=1", server.url));
    let up = dir.path().join("up.pidinst");
    std::fs::write(&up, canonicalize(&rec)).unwrap();
    rec.landing_page = Some(format!("{}/nothing-here", server.url));
    let missing = dir.path().join("missing.pidinst");
    std::fs::write(&missing, canonicalize(&rec)).unwrap();
    rec.landing_page = Some("http://127.0.0.1:9/".into());
    let down = dir.path().join("down.pidinst");
    std::fs::write(&down, canonicalize(&rec)).unwrap();

    let ok = run(&["check".as_ref(), up.as_os_str()]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).starts_with("200\t"));
    let bad = run(&["check".as_ref(), up.as_os_str(), missing.as_os_str(), down.as_os_str()]);
    assert_eq!(code(&bad), 1);
    let lines: Vec<String> = stdout(&bad).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(lines, ["200", "404", "unreachable"]);
    server.stop();
}
