/** Deep-link routing: the app's URLs are exactly the API's entity links. */

export interface Route {
  project: string;
  entityIri: string | null;
}

export function parsePath(pathname: string): Route | null {
  const match = pathname.match(/^\/p\/([^/]+)(?:\/e\/(.+))?$/);
  if (!match) return null;
  return {
    project: match[1],
    entityIri: match[2] ? decodeURIComponent(match[2]) : null,
  };
}

export function entityPath(project: string, iri: string): string {
  return `/p/${project}/e/${encodeURIComponent(iri)}`;
}
