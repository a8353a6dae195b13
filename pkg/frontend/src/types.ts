/** Wire types matching the service's JSON payloads. */

export interface DisplayName {
  text: string;
  language: string | null;
  secondary?: DisplayName;
}

export interface AnnotationValueJson {
  lexical: string;
  lang?: string | null;
  datatype?: string | null;
}

export interface ChildSummary {
  iri: string;
  displayName: DisplayName;
  deprecated: boolean;
  tags: string[];
  childCount: number;
}

export interface EntityView {
  iri: string;
  deepLink: string;
  displayName: DisplayName;
  secondaryDisplayName: DisplayName | null;
  labels: AnnotationValueJson[];
  altLabels: AnnotationValueJson[];
  definitions: AnnotationValueJson[];
  noAds: boolean;
  isHumanReviewed: boolean;
  deprecated: boolean;
  parent: string | null;
  breadcrumb: string[];
  children: ChildSummary[];
  tags: { id: string; label: string; color: string }[];
  threads: string[];
  revision: number;
}

export interface AxiomJson {
  kind: "declaration" | "subClassOf" | "annotation";
  subject?: string;
  sub?: string;
  super?: string;
  property?: string;
  value?: AnnotationValueJson;
}

export interface ChangeJson {
  op: "add" | "remove";
  axiom: AxiomJson;
}

export interface RevisionJson {
  rev: number;
  author: string;
  ts: string;
  msg: string;
  prov: { kind: string; of?: number };
  changes: ChangeJson[];
}

export interface EventEnvelope {
  seq: number;
  kind: "RevisionCommitted" | "CommentPosted" | "TagsChanged" | "SettingsChanged";
  payload: any;
  ts: string;
}

export interface SegmentJson {
  kind: "text" | "mention" | "entityLink" | "externalLink";
  source: string;
  value?: string;
}

export interface CommentJson {
  author: string;
  body: string;
  segments: SegmentJson[];
  ts: string;
}

export interface ThreadJson {
  id: string;
  entity: string;
  status: "open" | "resolved";
  created: string;
  updated: string;
  comments: CommentJson[];
}

export interface TagJson {
  id: string;
  label: string;
  color: string;
  description?: string | null;
}

export interface SearchResult {
  iri: string;
  displayName: { text: string; language: string | null };
  matchedField: string;
  rank: string;
}

export interface SettingsJson {
  name: string;
  primary: string[];
  secondary: string[];
  default: string;
  owner: string;
  acl: Record<string, string>;
  webhook: string | null;
  namespace: string;
  rootIri: string;
}

export interface ProjectInfo {
  id: string;
  name: string;
  role: string;
  revision: number;
}
