//! Instance file format: one JSON schema shared by the three problem
//! kinds.
//!
//! ```json
//! {
//!   "kind": "rdc" | "rgc" | "rxos",
//!   "topics": ["e1", ...],
//!   "documents": [{"id": "s1", "topics": ["e1", "e2"]}, ...],
//!   "users": [
//!     {"id": "u1", "interests": ["e1"], "k": 1},                    // rdc
//!     {"id": "u1", "groups": [{"interests": ["e1"], "k": 1}]},      // rgc
//!     {"id": "u1", "functions": [{"weights": {"s1": 0.5}}]}         // rxos
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rdc_core::extensions::{GroupInstance, XosInstance, DEFAULT_GROUP_CAP};
use rdc_core::Instance;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unknown instance kind {0:?} (expected rdc, rgc or rxos)")]
    UnknownKind(String),
    #[error("user {user:?}: missing field {field:?} for kind {kind:?}")]
    MissingUserField {
        user: String,
        field: &'static str,
        kind: &'static str,
    },
    #[error("invalid instance: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DocumentFile {
    id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    topics: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GroupFile {
    interests: Vec<String>,
    k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FunctionFile {
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct UserFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interests: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<GroupFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    functions: Option<Vec<FunctionFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    topics: Vec<String>,
    documents: Vec<DocumentFile>,
    users: Vec<UserFile>,
}

/// A parsed instance of any of the three kinds.
#[derive(Debug, Clone)]
pub enum ParsedInstance {
    Rdc(Instance),
    Rgc(GroupInstance),
    Rxos(XosInstance<f64>),
}

impl ParsedInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedInstance::Rdc(_) => "rdc",
            ParsedInstance::Rgc(_) => "rgc",
            ParsedInstance::Rxos(_) => "rxos",
        }
    }

    pub fn n_docs(&self) -> usize {
        match self {
            ParsedInstance::Rdc(i) => i.n_docs(),
            ParsedInstance::Rgc(i) => i.n_docs(),
            ParsedInstance::Rxos(i) => i.n_docs(),
        }
    }

    pub fn n_topics(&self) -> usize {
        match self {
            ParsedInstance::Rdc(i) => i.n_topics(),
            ParsedInstance::Rgc(i) => i.n_topics(),
            ParsedInstance::Rxos(_) => 0,
        }
    }

    pub fn n_users(&self) -> usize {
        match self {
            ParsedInstance::Rdc(i) => i.n_users(),
            ParsedInstance::Rgc(i) => i.n_users(),
            ParsedInstance::Rxos(i) => i.n_users(),
        }
    }

    pub fn doc_ids(&self) -> &[String] {
        match self {
            ParsedInstance::Rdc(i) => i.doc_ids(),
            ParsedInstance::Rgc(i) => i.doc_ids(),
            ParsedInstance::Rxos(i) => i.doc_ids(),
        }
    }
}

/// Parse and validate an instance document.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    match file.kind.as_str() {
        "rdc" => {
            let mut users = Vec::new();
            for u in &file.users {
                let interests =
                    u.interests
                        .clone()
                        .ok_or_else(|| FormatError::MissingUserField {
                            user: u.id.clone(),
                            field: "interests",
                            kind: "rdc",
                        })?;
                let k = u.k.ok_or_else(|| FormatError::MissingUserField {
                    user: u.id.clone(),
                    field: "k",
                    kind: "rdc",
                })?;
                users.push((u.id.clone(), interests, k));
            }
            let instance = Instance::new(
                file.topics.clone(),
                file.documents
                    .iter()
                    .map(|d| (d.id.clone(), d.topics.clone()))
                    .collect(),
                users,
            )
            .map_err(|e| FormatError::Invalid(vec![e.to_string()]))?;
            let violations = instance.validate();
            if !violations.is_empty() {
                return Err(FormatError::Invalid(
                    violations.iter().map(|v| v.to_string()).collect(),
                ));
            }
            Ok(ParsedInstance::Rdc(instance))
        }
        "rgc" => {
            let mut users = Vec::new();
            for u in &file.users {
                let groups = u.groups.clone().ok_or_else(|| FormatError::MissingUserField {
                    user: u.id.clone(),
                    field: "groups",
                    kind: "rgc",
                })?;
                users.push((
                    u.id.clone(),
                    groups.into_iter().map(|g| (g.interests, g.k)).collect(),
                ));
            }
            let instance = GroupInstance::new(
                file.topics.clone(),
                file.documents
                    .iter()
                    .map(|d| (d.id.clone(), d.topics.clone()))
                    .collect(),
                users,
            )
            .map_err(|e| FormatError::Invalid(vec![e.to_string()]))?;
            let problems = instance.validate(DEFAULT_GROUP_CAP);
            if !problems.is_empty() {
                return Err(FormatError::Invalid(problems));
            }
            Ok(ParsedInstance::Rgc(instance))
        }
        "rxos" => {
            let mut users = Vec::new();
            for u in &file.users {
                let functions =
                    u.functions
                        .clone()
                        .ok_or_else(|| FormatError::MissingUserField {
                            user: u.id.clone(),
                            field: "functions",
                            kind: "rxos",
                        })?;
                users.push((
                    u.id.clone(),
                    functions
                        .into_iter()
                        .map(|f| f.weights.into_iter().collect::<Vec<(String, f64)>>())
                        .collect(),
                ));
            }
            let instance = XosInstance::new(
                file.documents.iter().map(|d| d.id.clone()).collect(),
                users,
            )
            .map_err(|e| FormatError::Invalid(vec![e.to_string()]))?;
            let problems = instance.validate(DEFAULT_GROUP_CAP);
            if !problems.is_empty() {
                return Err(FormatError::Invalid(problems));
            }
            Ok(ParsedInstance::Rxos(instance))
        }
        other => Err(FormatError::UnknownKind(other.to_string())),
    }
}

/// Serialize back to the shared schema (stable field and key order).
pub fn serialize_instance(instance: &ParsedInstance) -> String {
    let file = match instance {
        ParsedInstance::Rdc(i) => InstanceFile {
            kind: "rdc".into(),
            topics: i.topic_ids().to_vec(),
            documents: (0..i.n_docs())
                .map(|s| DocumentFile {
                    id: i.doc_ids()[s].clone(),
                    topics: i
                        .doc_topics(s)
                        .iter()
                        .map(|e| i.topic_ids()[e].clone())
                        .collect(),
                })
                .collect(),
            users: (0..i.n_users())
                .map(|u| UserFile {
                    id: i.user_ids()[u].clone(),
                    interests: Some(
                        i.interests(u)
                            .iter()
                            .map(|e| i.topic_ids()[e].clone())
                            .collect(),
                    ),
                    k: Some(i.threshold(u)),
                    groups: None,
                    functions: None,
                })
                .collect(),
        },
        ParsedInstance::Rgc(i) => InstanceFile {
            kind: "rgc".into(),
            topics: i.topic_ids().to_vec(),
            documents: (0..i.n_docs())
                .map(|s| DocumentFile {
                    id: i.doc_ids()[s].clone(),
                    topics: i.all_doc_topics()[s]
                        .iter()
                        .map(|e| i.topic_ids()[e].clone())
                        .collect(),
                })
                .collect(),
            users: (0..i.n_users())
                .map(|u| UserFile {
                    id: i.user_ids()[u].clone(),
                    interests: None,
                    k: None,
                    groups: Some(
                        i.groups(u)
                            .iter()
                            .map(|(interests, k)| GroupFile {
                                interests: interests
                                    .iter()
                                    .map(|e| i.topic_ids()[e].clone())
                                    .collect(),
                                k: *k,
                            })
                            .collect(),
                    ),
                    functions: None,
                })
                .collect(),
        },
        ParsedInstance::Rxos(i) => InstanceFile {
            kind: "rxos".into(),
            topics: Vec::new(),
            documents: i
                .doc_ids()
                .iter()
                .map(|id| DocumentFile {
                    id: id.clone(),
                    topics: Vec::new(),
                })
                .collect(),
            users: (0..i.n_users())
                .map(|u| UserFile {
                    id: i.user_ids()[u].clone(),
                    interests: None,
                    k: None,
                    groups: None,
                    functions: Some(
                        i.functions(u)
                            .iter()
                            .map(|f| FunctionFile {
                                weights: f
                                    .iter()
                                    .map(|&(s, w)| (i.doc_ids()[s].clone(), w))
                                    .collect(),
                            })
                            .collect(),
                    ),
                })
                .collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&file).expect("schema types serialize");
    out.push('\n');
    out
}
