//! Registry and link-check commands over HTTP.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use pidinst::{canonicalize, Pid};
use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::header;
use reqwest::redirect::Policy;
use reqwest::StatusCode;

use crate::commands::load_record;
use crate::{Global, Status};

fn client() -> Result<Client> {
    Ok(Client::builder()
        .redirect(Policy::none())
        .timeout(Duration::from_secs(30))
        .build()?)
}

fn base(global: &Global) -> Result<String> {
    match &global.registry_url {
        Some(u) => Ok(u.trim_end_matches('/').to_string()),
        None => bail!("no registry configured; pass --registry-url or set PIDINST_REGISTRY_URL"),
    }
}

fn send(global: &Global, req: RequestBuilder) -> Result<Response> {
    let req = match &global.token {
        Some(t) => req.bearer_auth(t),
        None => req,
    };
    req.send().context("registry request failed")
}

/// Accepts bare handles and resolver URLs alike.
fn bare(pid: &str) -> String {
    Pid::parse(pid).value().to_string()
}

/// Error bodies are JSON `{error, message, report?}`.
fn explain(resp: Response) -> String {
    let status = resp.status();
    let body = resp.text().unwrap_or_default();
    match serde_json::from_str::<serde_json::Value>(&body) {
        Ok(v) => {
            let mut s = format!("{status}: {}", v["message"].as_str().unwrap_or(&body));
            if let Some(r) = v.get("report") {
                s.push('\n');
                s.push_str(&serde_json::to_string_pretty(r).unwrap_or_default());
            }
            s
        }
        Err(_) => format!("{status}: {body}"),
    }
}

/// Client errors the registry answers for a well-formed request are domain
/// failures; anything else means the command could not run.
fn domain_failure(status: StatusCode) -> bool {
    matches!(
        status,
        StatusCode::BAD_REQUEST
            | StatusCode::NOT_FOUND
            | StatusCode::CONFLICT
            | StatusCode::GONE
            | StatusCode::UNPROCESSABLE_ENTITY
    )
}

fn reject(resp: Response) -> Result<Status> {
    let status = resp.status();
    let msg = explain(resp);
    if domain_failure(status) {
        eprintln!("pidinst: {msg}");
        Ok(Status::Failed)
    } else {
        bail!("registry answered {msg}")
    }
}

pub fn mint(global: &Global, file: &Path) -> Result<Status> {
    let record = load_record(file)?;
    let url = format!("{}/api/v1/instruments", base(global)?);
    let req = client()?
        .post(url)
        .header(header::CONTENT_TYPE, pidinst::canonical::MEDIA_TYPE)
        .body(canonicalize(&record));
    let resp = send(global, req)?;
    if resp.status() != StatusCode::CREATED {
        return reject(resp);
    }
    let body: serde_json::Value = resp.json().context("unexpected mint response")?;
    match body["pid"].as_str() {
        Some(pid) => println!("{pid}"),
        None => bail!("mint response carries no pid"),
    }
    Ok(Status::Ok)
}

pub fn resolve(global: &Global, pid: &str, noredirect: bool) -> Result<Status> {
    let mut url = format!("{}/{}", base(global)?, bare(pid));
    if noredirect {
        url.push_str("?noredirect");
    }
    let resp = send(global, client()?.get(url))?;
    match resp.status() {
        StatusCode::FOUND if !noredirect => {
            let location = resp
                .headers()
                .get(header::LOCATION)
                .and_then(|v| v.to_str().ok())
                .context("redirect without Location")?;
            println!("{location}");
            Ok(Status::Ok)
        }
        StatusCode::OK if noredirect => {
            print!("{}", resp.text()?);
            Ok(Status::Ok)
        }
        StatusCode::GONE => {
            eprintln!("pidinst: {} has been tombstoned; last metadata follows", bare(pid));
            print!("{}", resp.text()?);
            Ok(Status::Failed)
        }
        _ => reject(resp),
    }
}

pub fn tombstone(global: &Global, pid: &str) -> Result<Status> {
    let url = format!("{}/api/v1/instruments/{}", base(global)?, bare(pid));
    let resp = send(global, client()?.delete(url))?;
    if resp.status() == StatusCode::NO_CONTENT {
        Ok(Status::Ok)
    } else {
        reject(resp)
    }
}

/// One `status<TAB>url` line per record; no action is taken on failures.
pub fn check(files: &[PathBuf]) -> Result<Status> {
    let client = client()?;
    let mut all_ok = true;
    for file in files {
        let record = load_record(file)?;
        let Some(url) = record.landing_page else {
            println!("missing\t{}", file.display());
            all_ok = false;
            continue;
        };
        match client.get(&url).send() {
            Ok(resp) => {
                let s = resp.status();
                all_ok &= s.is_success() || s.is_redirection();
                println!("{}\t{url}", s.as_u16());
            }
            Err(e) => {
                all_ok = false;
                println!("unreachable\t{url}");
                eprintln!("pidinst: {url}: {e}");
            }
        }
    }
    Ok(if all_ok { Status::Ok } else { Status::Failed })
}
