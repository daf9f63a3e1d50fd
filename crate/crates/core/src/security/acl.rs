use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::validation::Provider;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grantee {
    AllUsers,
    AuthenticatedUsers,
    Specific,
}

impl Grantee {
    pub fn is_public(self) -> bool {
        !matches!(self, Grantee::Specific)
    }
}

/// AWS permission vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Permission {
    Read,
    Write,
    ReadAcp,
    WriteAcp,
    FullControl,
}

impl Permission {
    pub const ALL: [Permission; 5] = [
        Permission::Read,
        Permission::Write,
        Permission::ReadAcp,
        Permission::WriteAcp,
        Permission::FullControl,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Permission::Read => "READ",
            Permission::Write => "WRITE",
            Permission::ReadAcp => "READ_ACP",
            Permission::WriteAcp => "WRITE_ACP",
            Permission::FullControl => "FULL_CONTROL",
        }
    }
}

/// Normalized action vocabulary shared by all providers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    List,
    ReadObjects,
    WriteObjects,
    DeleteObjects,
    ChangePermissions,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::List,
        Action::ReadObjects,
        Action::WriteObjects,
        Action::DeleteObjects,
        Action::ChangePermissions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::List => "list",
            Action::ReadObjects => "read_objects",
            Action::WriteObjects => "write_objects",
            Action::DeleteObjects => "delete_objects",
            Action::ChangePermissions => "change_permissions",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    PublicWrite,
    PublicDelete,
    PublicAclChange,
    SensitiveContent,
}

impl Flag {
    pub const ALL: [Flag; 4] = [
        Flag::PublicWrite,
        Flag::PublicDelete,
        Flag::PublicAclChange,
        Flag::SensitiveContent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::PublicWrite => "public_write",
            Flag::PublicDelete => "public_delete",
            Flag::PublicAclChange => "public_acl_change",
            Flag::SensitiveContent => "sensitive_content",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One grant as the provider states it; `permission` is a provider token
/// such as `WRITE`, `roles/storage.objectAdmin` or `public-read-write`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Grant {
    pub grantee: Grantee,
    pub permission: String,
}

impl Grant {
    pub fn new(grantee: Grantee, permission: impl Into<String>) -> Self {
        Grant {
            grantee,
            permission: permission.into(),
        }
    }

    pub fn aws(grantee: Grantee, permission: Permission) -> Self {
        Grant::new(grantee, permission.token())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclRecord {
    pub provider: Provider,
    pub grants: Vec<Grant>,
}

impl AclRecord {
    pub fn new(provider: Provider, grants: Vec<Grant>) -> Self {
        AclRecord { provider, grants }
    }
}

/// Maps provider permission tokens to normalized actions.
#[derive(Clone, Debug)]
pub struct NormalizationTable {
    map: HashMap<(Provider, String), Vec<Action>>,
}

impl NormalizationTable {
    pub fn bundled() -> Self {
        Self::parse(include_str!("../../data/acl_normalization.tsv"))
            .expect("bundled normalization table parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// `provider<TAB>token<TAB>action,action,...`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::Config(format!("normalization line {}: {reason}", i + 1));
            let mut cols = line.split('\t');
            let provider: Provider = cols.next().ok_or_else(|| bad("missing provider"))?.parse()?;
            let token = cols.next().ok_or_else(|| bad("missing permission"))?.trim();
            let actions = cols
                .next()
                .unwrap_or("")
                .split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(|a| {
                    Action::ALL
                        .into_iter()
                        .find(|x| x.as_str() == a)
                        .ok_or_else(|| bad(&format!("unknown action {a:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            map.insert((provider, token.to_owned()), actions);
        }
        Ok(NormalizationTable { map })
    }

    pub fn actions(&self, provider: Provider, token: &str) -> Result<&[Action]> {
        self.map
            .get(&(provider, token.to_owned()))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownPermission {
                provider: provider.to_string(),
                token: token.to_owned(),
            })
    }

    /// Every (grantee, action) pair the ACL allows.
    pub fn normalize(&self, acl: &AclRecord) -> Result<BTreeSet<(Grantee, Action)>> {
        let mut out = BTreeSet::new();
        for g in &acl.grants {
            for a in self.actions(acl.provider, &g.permission)? {
                out.insert((g.grantee, *a));
            }
        }
        Ok(out)
    }
}

/// Misconfiguration flags: write, delete or ACL change granted to everyone
/// or to any authenticated user. Grants to specific principals never flag.
pub fn classify_acl(acl: &AclRecord, table: &NormalizationTable) -> Result<BTreeSet<Flag>> {
    let mut flags = BTreeSet::new();
    for (grantee, action) in table.normalize(acl)? {
        if !grantee.is_public() {
            continue;
        }
        match action {
            Action::WriteObjects => flags.insert(Flag::PublicWrite),
            Action::DeleteObjects => flags.insert(Flag::PublicDelete),
            Action::ChangePermissions => flags.insert(Flag::PublicAclChange),
            Action::List | Action::ReadObjects => false,
        };
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aws(grants: &[(Grantee, Permission)]) -> AclRecord {
        AclRecord::new(
            Provider::Aws,
            grants.iter().map(|(g, p)| Grant::aws(*g, *p)).collect(),
        )
    }

    #[test]
    fn acl_examples() {
        let t = NormalizationTable::bundled();
        let all = classify_acl(&aws(&[(Grantee::AllUsers, Permission::FullControl)]), &t).unwrap();
        assert_eq!(
            all,
            BTreeSet::from([Flag::PublicWrite, Flag::PublicDelete, Flag::PublicAclChange])
        );
        let auth = classify_acl(&aws(&[(Grantee::AuthenticatedUsers, Permission::Write)]), &t).unwrap();
        assert_eq!(auth, BTreeSet::from([Flag::PublicWrite, Flag::PublicDelete]));
        let owner = classify_acl(&aws(&[(Grantee::Specific, Permission::FullControl)]), &t).unwrap();
        assert!(owner.is_empty());
        let read = classify_acl(&aws(&[(Grantee::AllUsers, Permission::Read)]), &t).unwrap();
        assert!(read.is_empty());
    }

    #[test]
    fn other_providers() {
        let t = NormalizationTable::bundled();
        let ali = AclRecord::new(
            Provider::Alibaba,
            vec![Grant::new(Grantee::AllUsers, "public-read-write")],
        );
        assert_eq!(
            classify_acl(&ali, &t).unwrap(),
            BTreeSet::from([Flag::PublicWrite, Flag::PublicDelete])
        );
        let gcp = AclRecord::new(
            Provider::Gcp,
            vec![Grant::new(Grantee::AllUsers, "storage.objects.create")],
        );
        assert_eq!(classify_acl(&gcp, &t).unwrap(), BTreeSet::from([Flag::PublicWrite]));
    }

    #[test]
    fn unknown_token_named() {
        let t = NormalizationTable::bundled();
        let acl = AclRecord::new(Provider::Aws, vec![Grant::new(Grantee::AllUsers, "SUPERUSER")]);
        match classify_acl(&acl, &t).unwrap_err() {
            Error::UnknownPermission { token, .. } => assert_eq!(token, "SUPERUSER"),
            e => panic!("{e}"),
        }
    }
}
