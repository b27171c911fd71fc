//! Strict readers over `serde_json::Value` objects that remember which keys
//! were consumed, so unknown properties can be rejected with their path.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum FieldError {
    Type { path: String, expected: &'static str },
    Missing { path: String },
    Unknown { name: String, path: String },
}

pub(crate) fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

pub(crate) fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

pub(crate) fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str, FieldError> {
    v.as_str().ok_or_else(|| FieldError::Type {
        path: path.to_string(),
        expected: "string",
    })
}

pub(crate) fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v [Value], FieldError> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| FieldError::Type {
        path: path.to_string(),
        expected: "array",
    })
}

pub(crate) struct ObjectReader<'v> {
    path: String,
    map: &'v Map<String, Value>,
    seen: Vec<&'v str>,
}

impl<'v> ObjectReader<'v> {
    pub(crate) fn new(v: &'v Value, path: &str) -> Result<Self, FieldError> {
        let map = v.as_object().ok_or_else(|| FieldError::Type {
            path: path.to_string(),
            expected: "object",
        })?;
        Ok(ObjectReader {
            path: path.to_string(),
            map,
            seen: Vec::new(),
        })
    }

    pub(crate) fn child_path(&self, key: &str) -> String {
        join(&self.path, key)
    }

    pub(crate) fn value(&mut self, key: &str) -> Option<&'v Value> {
        let (k, v) = self.map.get_key_value(key)?;
        self.seen.push(k.as_str());
        Some(v)
    }

    pub(crate) fn opt_str(&mut self, key: &str) -> Result<Option<String>, FieldError> {
        match self.value(key) {
            None => Ok(None),
            Some(v) => as_str(v, &join(&self.path, key)).map(|s| Some(s.to_string())),
        }
    }

    pub(crate) fn req_str(&mut self, key: &str) -> Result<String, FieldError> {
        self.opt_str(key)?.ok_or_else(|| FieldError::Missing {
            path: join(&self.path, key),
        })
    }

    pub(crate) fn req_value(&mut self, key: &str) -> Result<&'v Value, FieldError> {
        self.value(key).ok_or_else(|| FieldError::Missing {
            path: join(&self.path, key),
        })
    }

    pub(crate) fn opt_array(&mut self, key: &str) -> Result<&'v [Value], FieldError> {
        match self.value(key) {
            None => Ok(&[]),
            Some(v) => as_array(v, &join(&self.path, key)),
        }
    }

    /// Rejects the first key (in document order) that was never read.
    pub(crate) fn finish(self) -> Result<(), FieldError> {
        match self.map.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(k) => Err(FieldError::Unknown {
                name: k.clone(),
                path: self.path.clone(),
            }),
            None => Ok(()),
        }
    }
}

/// Inserts `key` only when the string is present.
pub(crate) fn put_opt(map: &mut Map<String, Value>, key: &str, v: &Option<String>) {
    if let Some(s) = v {
        map.insert(key.to_string(), Value::String(s.clone()));
    }
}

pub(crate) fn put(map: &mut Map<String, Value>, key: &str, v: &str) {
    map.insert(key.to_string(), Value::String(v.to_string()));
}
