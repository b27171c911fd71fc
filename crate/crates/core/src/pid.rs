//! Persistent identifiers and the resolver-URL forms they travel in.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Resolver used for the display form of handles unless a caller overrides it.
pub const DEFAULT_HANDLE_RESOLVER: &str = "http://hdl.handle.net/";
pub const DEFAULT_DOI_RESOLVER: &str = "https://doi.org/";

const HANDLE_HOSTS: &[&str] = &["hdl.handle.net"];
const DOI_HOSTS: &[&str] = &["doi.org", "dx.doi.org"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PidScheme {
    Handle,
    Doi,
    Url,
    Orcid,
    Ror,
    /// Anything else; carries the scheme label (`ark`, `urn`, ...) or
    /// `unqualified` for a bare local token.
    Other(String),
}

impl fmt::Display for PidScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PidScheme::Handle => f.write_str("Handle"),
            PidScheme::Doi => f.write_str("DOI"),
            PidScheme::Url => f.write_str("URL"),
            PidScheme::Orcid => f.write_str("ORCID"),
            PidScheme::Ror => f.write_str("ROR"),
            PidScheme::Other(label) => f.write_str(label),
        }
    }
}

/// A persistent identifier stored in its bare form.
///
/// The scheme is always a function of the value: [`Pid::parse`] infers it,
/// and the resolvable URL form is regenerated on output rather than stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pid {
    scheme: PidScheme,
    value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PidSyntaxError {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier `{0}` contains whitespace")]
    Whitespace(String),
    #[error("handle `{0}` must have exactly one `/` between a non-empty prefix and suffix")]
    Handle(String),
    #[error("DOI `{0}` must look like 10.<registrant>/<suffix>")]
    Doi(String),
    #[error("`{0}` is not an absolute URL")]
    Url(String),
}

impl Pid {
    /// Reads an identifier in bare or resolver-URL form.
    ///
    /// `http(s)://hdl.handle.net/X` becomes handle `X`, `https://doi.org/X`
    /// becomes DOI `X`; other URLs stay whole. Surrounding whitespace is
    /// trimmed. No syntax checking happens here, see [`Pid::check_syntax`].
    pub fn parse(input: &str) -> Pid {
        let trimmed = input.trim();
        if let Some((host, rest)) = split_http(trimmed) {
            let host = host.to_ascii_lowercase();
            if HANDLE_HOSTS.contains(&host.as_str()) {
                return Pid::classify(rest);
            }
            if DOI_HOSTS.contains(&host.as_str()) {
                return Pid::new(PidScheme::Doi, rest);
            }
            if host == "orcid.org" {
                return Pid::new(PidScheme::Orcid, rest);
            }
            if host == "ror.org" {
                return Pid::new(PidScheme::Ror, rest);
            }
            return Pid::new(PidScheme::Url, trimmed);
        }
        Pid::classify(trimmed)
    }

    fn classify(bare: &str) -> Pid {
        if bare.starts_with("10.") && bare.contains('/') {
            return Pid::new(PidScheme::Doi, bare);
        }
        if let Some((label, _)) = bare.split_once(':') {
            if !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Pid::new(PidScheme::Other(label.to_ascii_lowercase()), bare);
            }
        }
        if bare.contains('/') {
            return Pid::new(PidScheme::Handle, bare);
        }
        Pid::new(PidScheme::Other("unqualified".into()), bare)
    }

    fn new(scheme: PidScheme, value: &str) -> Pid {
        Pid {
            scheme,
            value: value.to_string(),
        }
    }

    /// Builds a handle from its parts without going through inference.
    pub fn handle(prefix: &str, suffix: &str) -> Pid {
        Pid::new(PidScheme::Handle, &format!("{prefix}/{suffix}"))
    }

    pub fn scheme(&self) -> &PidScheme {
        &self.scheme
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// Prefix and suffix of a handle-shaped value (handles and DOIs).
    pub fn split_handle(&self) -> Option<(&str, &str)> {
        match self.scheme {
            PidScheme::Handle | PidScheme::Doi => self.value.split_once('/'),
            _ => None,
        }
    }

    /// Resolvable URL with the default resolvers.
    pub fn display_url(&self) -> Option<String> {
        self.display_url_with(DEFAULT_HANDLE_RESOLVER)
    }

    /// Resolvable URL, using `handle_resolver` as the base for handles.
    pub fn display_url_with(&self, handle_resolver: &str) -> Option<String> {
        match &self.scheme {
            PidScheme::Handle => Some(join_base(handle_resolver, &self.value)),
            PidScheme::Doi => Some(join_base(DEFAULT_DOI_RESOLVER, &self.value)),
            PidScheme::Url => Some(self.value.clone()),
            PidScheme::Orcid => Some(join_base("https://orcid.org/", &self.value)),
            PidScheme::Ror => Some(join_base("https://ror.org/", &self.value)),
            PidScheme::Other(_) => None,
        }
    }

    /// Display URL when one exists, otherwise the bare value.
    pub fn to_reference(&self, handle_resolver: &str) -> String {
        self.display_url_with(handle_resolver)
            .unwrap_or_else(|| self.value.clone())
    }

    pub fn check_syntax(&self) -> Result<(), PidSyntaxError> {
        let v = &self.value;
        if v.is_empty() {
            return Err(PidSyntaxError::Empty);
        }
        if v.chars().any(char::is_whitespace) {
            return Err(PidSyntaxError::Whitespace(v.clone()));
        }
        match &self.scheme {
            PidScheme::Handle => {
                let mut parts = v.split('/');
                let (prefix, suffix) = (parts.next(), parts.next());
                match (prefix, suffix, parts.next()) {
                    (Some(p), Some(s), None) if !p.is_empty() && !s.is_empty() => Ok(()),
                    _ => Err(PidSyntaxError::Handle(v.clone())),
                }
            }
            PidScheme::Doi => match v.split_once('/') {
                Some((registrant, suffix))
                    if registrant.len() > 3 && registrant.starts_with("10.") && !suffix.is_empty() =>
                {
                    Ok(())
                }
                _ => Err(PidSyntaxError::Doi(v.clone())),
            },
            PidScheme::Url => match url::Url::parse(v) {
                Ok(u) if u.has_host() => Ok(()),
                _ => Err(PidSyntaxError::Url(v.clone())),
            },
            PidScheme::Orcid | PidScheme::Ror | PidScheme::Other(_) => Ok(()),
        }
    }
}

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

impl Serialize for Pid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.value)
    }
}

impl<'de> Deserialize<'de> for Pid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Pid, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(Pid::parse(&raw))
    }
}

fn split_http(s: &str) -> Option<(&str, &str)> {
    let lower = s.get(..8).map(str::to_ascii_lowercase).unwrap_or_default();
    let rest = if lower.starts_with("https://") {
        &s[8..]
    } else if lower.starts_with("http://") {
        &s[7..]
    } else {
        return None;
    };
    let (host, path) = rest.split_once('/').unwrap_or((rest, ""));
    Some((host, path))
}

fn join_base(base: &str, value: &str) -> String {
    if base.ends_with('/') {
        format!("{base}{value}")
    } else {
        format!("{base}/{value}")
    }
}

/// Normal form used to compare identifiers across records: trimmed, with
/// handle and DOI resolver prefixes stripped. Other URLs are kept as given.
pub fn normalize_identifier(raw: &str) -> String {
    let trimmed = raw.trim();
    let pid = Pid::parse(trimmed);
    match pid.scheme {
        PidScheme::Handle | PidScheme::Doi => pid.value,
        _ => trimmed.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_schemes() {
        assert_eq!(Pid::parse("21.T11998/0000-001A-3905-F").scheme(), &PidScheme::Handle);
        assert_eq!(Pid::parse("10.5442/NI000001").scheme(), &PidScheme::Doi);
        let p = Pid::parse(" http://hdl.handle.net/21.T11998/0000-001A-3905-F ");
        assert_eq!(p.scheme(), &PidScheme::Handle);
        assert_eq!(p.value(), "21.T11998/0000-001A-3905-F");
        let d = Pid::parse("https://doi.org/10.17815/jlsrf-4-110");
        assert_eq!(d.scheme(), &PidScheme::Doi);
        assert_eq!(d.value(), "10.17815/jlsrf-4-110");
        assert_eq!(Pid::parse("https://example.org/x").scheme(), &PidScheme::Url);
        assert_eq!(
            Pid::parse("ark:/13030/tf5p30086k").scheme(),
            &PidScheme::Other("ark".into())
        );
        assert_eq!(
            Pid::parse("https://orcid.org/0000-0002-1825-0097").value(),
            "0000-0002-1825-0097"
        );
    }

    #[test]
    fn display_url_uses_http_resolver_for_handles() {
        let p = Pid::parse("21.T11998/0000-001A-3904-0");
        assert_eq!(
            p.display_url().unwrap(),
            "http://hdl.handle.net/21.T11998/0000-001A-3904-0"
        );
        assert_eq!(
            p.display_url_with("https://hdl.handle.net").unwrap(),
            "https://hdl.handle.net/21.T11998/0000-001A-3904-0"
        );
        assert_eq!(
            Pid::parse("10.5442/NI000001").display_url().unwrap(),
            "https://doi.org/10.5442/NI000001"
        );
    }

    #[test]
    fn syntax_checks() {
        assert!(Pid::parse("21.T11998/0000-001A-3905-F").check_syntax().is_ok());
        assert!(matches!(
            Pid::parse("21.T11998/a/b").check_syntax(),
            Err(PidSyntaxError::Handle(_))
        ));
        assert!(matches!(
            Pid::handle("21.T11998", "").check_syntax(),
            Err(PidSyntaxError::Handle(_))
        ));
        assert!(matches!(
            Pid::handle("21.T11998", "a b").check_syntax(),
            Err(PidSyntaxError::Whitespace(_))
        ));
        assert!(matches!(Pid::parse("10./x").check_syntax(), Err(PidSyntaxError::Doi(_))));
        assert!(Pid::parse("10.5442/NI000001").check_syntax().is_ok());
        assert!(matches!(Pid::parse("").check_syntax(), Err(PidSyntaxError::Empty)));
    }

    #[test]
    fn normalization_strips_resolvers() {
        assert_eq!(normalize_identifier("http://hdl.handle.net/21.T1/x"), "21.T1/x");
        assert_eq!(normalize_identifier("https://hdl.handle.net/21.T1/x"), "21.T1/x");
        assert_eq!(normalize_identifier(" https://doi.org/10.1/y "), "10.1/y");
        assert_eq!(
            normalize_identifier("http://www.bodc.ac.uk/a.pdf"),
            "http://www.bodc.ac.uk/a.pdf"
        );
    }
}
