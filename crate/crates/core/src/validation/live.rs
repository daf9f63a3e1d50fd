//! HTTP prober against the real provider endpoints.
//!
//! Off unless the configuration enables it *and* the acknowledgment
//! environment variable is set to `1`.

use std::collections::BTreeMap;
use std::time::Duration;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{ProbeBackend, ProbeResponse, Provider, RateLimiter};
use crate::error::{Error, Result};
use crate::security::{AclRecord, BucketContents, FileMeta, Grant, Grantee};

pub const ACK_ENV: &str = "BUCKETGEN_LIVE_ACK";

#[derive(Clone, Debug)]
pub struct LiveConfig {
    pub enabled: bool,
    /// Ceiling on requests per second across all threads.
    pub rate_per_sec: f64,
    pub timeout: Duration,
    /// URL templates with one `{name}` placeholder, overriding the default
    /// `https://<host>/` per provider.
    pub endpoints: BTreeMap<Provider, String>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            enabled: false,
            rate_per_sec: 10.0,
            timeout: Duration::from_secs(10),
            endpoints: BTreeMap::new(),
        }
    }
}

/// Both switches must be on: the config flag and `BUCKETGEN_LIVE_ACK=1`.
pub fn check_guardrail(enabled: bool, ack: Option<&str>) -> Result<()> {
    if !enabled {
        return Err(Error::LiveProbingRefused(
            "live probing is not enabled in the configuration".into(),
        ));
    }
    if ack != Some("1") {
        return Err(Error::LiveProbingRefused(format!(
            "set {ACK_ENV}=1 to acknowledge probing third-party infrastructure"
        )));
    }
    Ok(())
}

pub struct LiveBackend {
    agent: ureq::Agent,
    limiter: RateLimiter,
    config: LiveConfig,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self> {
        check_guardrail(config.enabled, std::env::var(ACK_ENV).ok().as_deref())?;
        if !(config.rate_per_sec.is_finite() && config.rate_per_sec > 0.0) {
            return Err(Error::Config(format!("bad probe rate {}", config.rate_per_sec)));
        }
        for t in config.endpoints.values() {
            if t.matches("{name}").count() != 1 {
                return Err(Error::Config(format!("endpoint {t:?} needs one {{name}}")));
            }
        }
        Ok(LiveBackend {
            agent: ureq::AgentBuilder::new().timeout(config.timeout).build(),
            limiter: RateLimiter::new(config.rate_per_sec),
            config,
        })
    }

    fn url(&self, name: &str, provider: Provider) -> String {
        match self.config.endpoints.get(&provider) {
            Some(t) => t.replace("{name}", name),
            None => format!("https://{}/", provider.host(name)),
        }
    }

    /// Status and body of one rate-limited GET; status 0 when there was
    /// no HTTP response at all.
    fn get(&self, url: &str) -> (u16, String) {
        self.limiter.acquire();
        match self.agent.get(url).call() {
            Ok(resp) => {
                let status = resp.status();
                (status, resp.into_string().unwrap_or_default())
            }
            Err(ureq::Error::Status(status, resp)) => (status, resp.into_string().unwrap_or_default()),
            Err(ureq::Error::Transport(_)) => (0, String::new()),
        }
    }
}

impl ProbeBackend for LiveBackend {
    fn probe(&self, name: &str, provider: Provider) -> Result<ProbeResponse> {
        let (status, body) = self.get(&self.url(name, provider));
        let listable = status == 200 && parse_listing(&body).is_some();
        Ok(ProbeResponse { status, listable })
    }

    fn inspect(&self, name: &str, provider: Provider) -> Result<BucketContents> {
        let base = self.url(name, provider);
        let (status, body) = self.get(&base);
        let files = if status == 200 {
            parse_listing(&body).unwrap_or_default()
        } else {
            Vec::new()
        };
        let sep = if base.contains('?') { '&' } else { '?' };
        let (status, body) = self.get(&format!("{base}{sep}acl"));
        let acl = if status == 200 {
            parse_acl(&body, provider)
        } else {
            None
        };
        Ok(BucketContents { acl, files })
    }
}

/// Object metadata from a `ListBucketResult` document, or `None` if the
/// body is not a well-formed listing.
pub fn parse_listing(xml: &str) -> Option<Vec<FileMeta>> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut path: Vec<String> = Vec::new();
    let mut saw_root = false;
    let mut files = Vec::new();
    let mut current: Option<FileMeta> = None;
    loop {
        match reader.read_event().ok()? {
            Event::Start(e) => {
                let tag = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                if path.is_empty() {
                    if tag != "ListBucketResult" {
                        return None;
                    }
                    saw_root = true;
                }
                if tag == "Contents" && path.len() == 1 {
                    current = Some(FileMeta::named(""));
                }
                path.push(tag);
            }
            Event::End(_) => {
                if path.pop().as_deref() == Some("Contents") && path.len() == 1 {
                    if let Some(f) = current.take().filter(|f| !f.key.is_empty()) {
                        files.push(f);
                    }
                }
            }
            Event::Empty(e) => {
                if path.is_empty() {
                    return (e.local_name().as_ref() == b"ListBucketResult").then(Vec::new);
                }
            }
            Event::Text(t) => {
                let text = t.unescape().ok()?.into_owned();
                if let (Some(f), Some(tag)) = (current.as_mut(), path.last()) {
                    match tag.as_str() {
                        "Key" => f.key = text,
                        "Size" => f.size = text.parse().unwrap_or(0),
                        "ETag" => f.etag = text.trim_matches('"').to_owned(),
                        "LastModified" => f.last_modified = text,
                        _ => {}
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    (saw_root && path.is_empty()).then_some(files)
}

fn grantee_from(value: &str) -> Grantee {
    if value.ends_with("AllUsers") && !value.contains("Authenticated") {
        Grantee::AllUsers
    } else if value.contains("AuthenticatedUsers") {
        Grantee::AuthenticatedUsers
    } else {
        Grantee::Specific
    }
}

/// Reads an ACL document in the S3 (`Grant`/`Grantee`/`Permission`), GCS
/// XML (`Entry`/`Scope`/`Permission`) or OSS (`Grant` text) shape.
pub fn parse_acl(xml: &str, provider: Provider) -> Option<AclRecord> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut path: Vec<String> = Vec::new();
    let mut grantee = Grantee::Specific;
    let mut grants = Vec::new();
    let mut saw_root = false;
    loop {
        match reader.read_event().ok()? {
            Event::Start(e) => {
                let tag = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                saw_root = true;
                if tag == "Grant" || tag == "Entry" {
                    grantee = Grantee::Specific;
                }
                if tag == "Scope" {
                    grantee = scope_grantee(&e);
                }
                path.push(tag);
            }
            Event::Empty(e) => {
                if e.local_name().as_ref() == b"Scope" {
                    grantee = scope_grantee(&e);
                }
            }
            Event::End(_) => {
                path.pop();
            }
            Event::Text(t) => {
                let text = t.unescape().ok()?.trim().to_owned();
                match path.last().map(String::as_str) {
                    Some("URI") => grantee = grantee_from(&text),
                    Some("Permission") => grants.push(Grant::new(grantee, text)),
                    // OSS states the canned ACL directly.
                    Some("Grant") => grants.push(Grant::new(Grantee::AllUsers, text)),
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    (saw_root && path.is_empty()).then(|| AclRecord::new(provider, grants))
}

fn scope_grantee(e: &quick_xml::events::BytesStart<'_>) -> Grantee {
    for attr in e.attributes().flatten() {
        if attr.key.local_name().as_ref() == b"type" {
            let v = attr.unescape_value().map(|v| v.into_owned()).unwrap_or_default();
            return match v.as_str() {
                "AllUsers" => Grantee::AllUsers,
                "AllAuthenticatedUsers" => Grantee::AuthenticatedUsers,
                _ => Grantee::Specific,
            };
        }
    }
    Grantee::Specific
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guardrail_needs_both_switches() {
        assert!(check_guardrail(false, Some("1")).is_err());
        assert!(check_guardrail(true, None).is_err());
        assert!(check_guardrail(true, Some("yes")).is_err());
        assert!(check_guardrail(true, Some("1")).is_ok());
    }

    #[test]
    fn listing_documents() {
        let xml = r#"<?xml version="1.0" encoding="UTF-8"?>
<ListBucketResult xmlns="http://s3.amazonaws.com/doc/2006-03-01/">
  <Name>b</Name>
  <Contents><Key>a/b.sql</Key><Size>12</Size><ETag>"abc"</ETag><LastModified>2020-01-01T00:00:00.000Z</LastModified></Contents>
  <Contents><Key>logo.png</Key><Size>3</Size></Contents>
</ListBucketResult>"#;
        let files = parse_listing(xml).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].key, "a/b.sql");
        assert_eq!(files[0].size, 12);
        assert_eq!(files[0].etag, "abc");
        assert_eq!(parse_listing("<ListBucketResult/>").unwrap().len(), 0);
        assert!(parse_listing("<html><body>site</body></html>").is_none());
        assert!(parse_listing("<ListBucketResult><Contents>").is_none());
        assert!(parse_listing("").is_none());
    }

    #[test]
    fn acl_documents() {
        let s3 = r#"<AccessControlPolicy><Owner><ID>o</ID></Owner><AccessControlList>
<Grant><Grantee xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:type="CanonicalUser"><ID>o</ID></Grantee><Permission>FULL_CONTROL</Permission></Grant>
<Grant><Grantee xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:type="Group"><URI>http://acs.amazonaws.com/groups/global/AllUsers</URI></Grantee><Permission>WRITE</Permission></Grant>
<Grant><Grantee xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:type="Group"><URI>http://acs.amazonaws.com/groups/global/AuthenticatedUsers</URI></Grantee><Permission>READ</Permission></Grant>
</AccessControlList></AccessControlPolicy>"#;
        let acl = parse_acl(s3, Provider::Aws).unwrap();
        assert_eq!(
            acl.grants,
            [
                Grant::new(Grantee::Specific, "FULL_CONTROL"),
                Grant::new(Grantee::AllUsers, "WRITE"),
                Grant::new(Grantee::AuthenticatedUsers, "READ"),
            ]
        );

        let gcs = r#"<AccessControlList><Entries><Entry><Scope type="AllUsers"/><Permission>READ</Permission></Entry></Entries></AccessControlList>"#;
        let acl = parse_acl(gcs, Provider::Gcp).unwrap();
        assert_eq!(acl.grants, [Grant::new(Grantee::AllUsers, "READ")]);

        let oss = r#"<AccessControlPolicy><Owner><ID>1</ID></Owner><AccessControlList><Grant>public-read-write</Grant></AccessControlList></AccessControlPolicy>"#;
        let acl = parse_acl(oss, Provider::Alibaba).unwrap();
        assert_eq!(acl.grants, [Grant::new(Grantee::AllUsers, "public-read-write")]);
    }
}
