import { ApiClient } from "./api.js";
import { EventFeed } from "./events.js";
import { ChangeJson, EntityView, EventEnvelope } from "./types.js";

export type StoreListener = () => void;

/**
 * Client-side project state. Holds fetched entity views keyed by IRI and
 * the expansion set; it never derives taxonomy facts locally. Whenever a
 * server event names an entity, the cached views that mention it are
 * re-fetched, so the tree converges to server truth within one event
 * delivery and without a full reload.
 */
export class ProjectStore {
  views = new Map<string, EntityView>();
  expanded = new Set<string>();
  selected: string | null = null;
  revision = 0;
  seq = 0;
  rootIri: string;

  private listeners = new Set<StoreListener>();
  private refreshing = Promise.resolve();

  constructor(
    readonly api: ApiClient,
    readonly project: string,
    rootIri: string,
    private readonly feed?: EventFeed,
  ) {
    this.rootIri = rootIri;
  }

  onChange(listener: StoreListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Initial load: root view, then live events from the current revision. */
  async open(): Promise<void> {
    const root = await this.api.entity(this.project, this.rootIri);
    this.views.set(this.rootIri, root);
    this.expanded.add(this.rootIri);
    this.revision = root.revision;
    this.feed?.connect(this.seq, (envelope) => void this.apply(envelope));
    this.notify();
  }

  view(iri: string): EntityView | undefined {
    return this.views.get(iri);
  }

  async expand(iri: string): Promise<void> {
    this.expanded.add(iri);
    if (!this.views.has(iri)) {
      this.views.set(iri, await this.api.entity(this.project, iri));
    }
    this.notify();
  }

  collapse(iri: string): void {
    this.expanded.delete(iri);
    this.notify();
  }

  async select(iri: string | null): Promise<void> {
    this.selected = iri;
    if (iri && !this.views.has(iri)) {
      this.views.set(iri, await this.api.entity(this.project, iri));
    }
    this.notify();
  }

  /** Apply one server event; resolves when affected views are re-fetched. */
  apply(envelope: EventEnvelope): Promise<void> {
    this.seq = envelope.seq;
    let affected: Set<string>;
    switch (envelope.kind) {
      case "RevisionCommitted":
        this.revision = envelope.payload.rev;
        affected = entitiesInChanges(envelope.payload.changes as ChangeJson[]);
        break;
      case "TagsChanged":
        affected = new Set(
          (envelope.payload.changes as { entity: string }[]).map((c) => c.entity),
        );
        break;
      case "CommentPosted":
        affected = new Set([envelope.payload.entityIri as string]);
        break;
      default:
        affected = new Set();
    }
    // serialize refreshes so events apply in seq order
    this.refreshing = this.refreshing.then(() => this.refresh(affected));
    return this.refreshing;
  }

  private async refresh(affected: Set<string>): Promise<void> {
    const stale = [...this.views.keys()].filter((iri) => {
      if (affected.has(iri)) return true;
      const view = this.views.get(iri);
      return view !== undefined && view.children.some((c) => affected.has(c.iri));
    });
    await Promise.all(
      stale.map(async (iri) => {
        try {
          this.views.set(iri, await this.api.entity(this.project, iri));
        } catch {
          this.views.delete(iri); // entity no longer viewable
          this.expanded.delete(iri);
        }
      }),
    );
    if (stale.length > 0 || affected.size === 0) this.notify();
    this.notify();
  }

  /** Wait until queued event refreshes have settled (used by tests). */
  settle(): Promise<void> {
    return this.refreshing;
  }

  /**
   * Plain tree snapshot of everything currently materialized under the
   * root; comparing snapshots against a freshly loaded store is how the
   * "no stale client state" check works.
   */
  snapshot(iri: string = this.rootIri): TreeSnapshot | null {
    const view = this.views.get(iri);
    if (!view) return null;
    return {
      iri,
      name: view.displayName.text,
      deprecated: view.deprecated,
      tags: view.tags.map((t) => t.id).sort(),
      children: view.children.map(
        (child) =>
          this.snapshot(child.iri) ?? {
            iri: child.iri,
            name: child.displayName.text,
            deprecated: child.deprecated,
            tags: [...child.tags].sort(),
            children: [],
          },
      ),
    };
  }
}

export interface TreeSnapshot {
  iri: string;
  name: string;
  deprecated: boolean;
  tags: string[];
  children: TreeSnapshot[];
}

export function entitiesInChanges(changes: ChangeJson[]): Set<string> {
  const out = new Set<string>();
  for (const change of changes) {
    const axiom = change.axiom;
    if (axiom.kind === "subClassOf") {
      if (axiom.sub) out.add(axiom.sub);
      if (axiom.super) out.add(axiom.super);
    } else if (axiom.subject) {
      out.add(axiom.subject);
    }
  }
  return out;
}
