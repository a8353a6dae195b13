import { AnnotationValueJson, ChangeJson, EntityView } from "./types.js";

export const RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label";
export const SKOS_ALT_LABEL = "http://www.w3.org/2004/02/skos/core#altLabel";
export const SKOS_DEFINITION = "http://www.w3.org/2004/02/skos/core#definition";
export const OWL_DEPRECATED = "http://www.w3.org/2002/07/owl#deprecated";
export const NO_ADS = "https://vocab.example.org/taxonomy#noAds";
export const IS_HUMAN_REVIEWED = "https://vocab.example.org/taxonomy#isHumanReviewed";
export const XSD_BOOLEAN = "http://www.w3.org/2001/XMLSchema#boolean";

export interface EntityEdits {
  labels: AnnotationValueJson[];
  altLabels: AnnotationValueJson[];
  definitions: AnnotationValueJson[];
  noAds: boolean;
  isHumanReviewed: boolean;
}

function annotation(
  op: "add" | "remove",
  property: string,
  subject: string,
  value: AnnotationValueJson,
): ChangeJson {
  const cleaned: AnnotationValueJson = { lexical: value.lexical };
  if (value.lang) cleaned.lang = value.lang;
  if (value.datatype) cleaned.datatype = value.datatype;
  return { op, axiom: { kind: "annotation", property, subject, value: cleaned } };
}

function valueKey(value: AnnotationValueJson): string {
  return JSON.stringify([value.lexical, value.lang ?? null, value.datatype ?? null]);
}

function diffValues(
  subject: string,
  property: string,
  before: AnnotationValueJson[],
  after: AnnotationValueJson[],
): ChangeJson[] {
  const changes: ChangeJson[] = [];
  const beforeKeys = new Map(before.map((v) => [valueKey(v), v]));
  const afterKeys = new Map(
    after.filter((v) => v.lexical.trim() !== "").map((v) => [valueKey(v), v]),
  );
  for (const [key, value] of beforeKeys) {
    if (!afterKeys.has(key)) changes.push(annotation("remove", property, subject, value));
  }
  for (const [key, value] of afterKeys) {
    if (!beforeKeys.has(key)) changes.push(annotation("add", property, subject, value));
  }
  return changes;
}

const BOOL_TRUE: AnnotationValueJson = { lexical: "true", datatype: XSD_BOOLEAN };

/**
 * Diff the editor state against the loaded view into ONE composite change
 * list; saving therefore produces exactly one revision. An empty result
 * means nothing changed and no commit should be sent.
 */
export function buildEntityChanges(view: EntityView, edits: EntityEdits): ChangeJson[] {
  const changes: ChangeJson[] = [
    ...diffValues(view.iri, RDFS_LABEL, view.labels, edits.labels),
    ...diffValues(view.iri, SKOS_ALT_LABEL, view.altLabels, edits.altLabels),
    ...diffValues(view.iri, SKOS_DEFINITION, view.definitions, edits.definitions),
  ];
  if (edits.noAds !== view.noAds) {
    changes.push(annotation(edits.noAds ? "add" : "remove", NO_ADS, view.iri, BOOL_TRUE));
  }
  if (edits.isHumanReviewed !== view.isHumanReviewed) {
    changes.push(
      annotation(
        edits.isHumanReviewed ? "add" : "remove",
        IS_HUMAN_REVIEWED,
        view.iri,
        BOOL_TRUE,
      ),
    );
  }
  return changes;
}

/** Mirror of the server's IRI minting convention for brand new entities. */
export function slugify(label: string): string {
  const slug = label
    .trim()
    .toLowerCase()
    .replace(/\s+/g, "_")
    .replace(/[^a-z0-9_]/g, "");
  return slug === "" ? "class" : slug;
}

export function newEntityChanges(
  namespace: string,
  parentIri: string,
  label: string,
  defaultLang: string,
  takenIris: Set<string>,
): { iri: string; changes: ChangeJson[] } {
  const base = slugify(label);
  let candidate = namespace + base;
  let suffix = 1;
  while (takenIris.has(candidate)) {
    suffix += 1;
    candidate = `${namespace}${base}_${suffix}`;
  }
  return {
    iri: candidate,
    changes: [
      { op: "add", axiom: { kind: "declaration", subject: candidate } },
      { op: "add", axiom: { kind: "subClassOf", sub: candidate, super: parentIri } },
      annotation("add", RDFS_LABEL, candidate, { lexical: label.trim(), lang: defaultLang }),
    ],
  };
}

/** Human-oriented one-line rendering of an atomic change for history views. */
export function describeChange(change: ChangeJson): string {
  const tail = (iri?: string) => (iri ? iri.split(/[/#]/).pop() ?? iri : "?");
  const op = change.op === "add" ? "+" : "−";
  const axiom = change.axiom;
  if (axiom.kind === "declaration") return `${op} class ${tail(axiom.subject)}`;
  if (axiom.kind === "subClassOf")
    return `${op} ${tail(axiom.sub)} → ${tail(axiom.super)}`;
  const value = axiom.value;
  const lang = value?.lang ? `@${value.lang}` : "";
  return `${op} ${tail(axiom.property)}(${tail(axiom.subject)}) "${value?.lexical}"${lang}`;
}
