import {
  ChangeJson,
  EntityView,
  ProjectInfo,
  RevisionJson,
  SearchResult,
  SettingsJson,
  TagJson,
  ThreadJson,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
  }
}

/** Thin typed client over the JSON API; every mutation goes through here. */
export class ApiClient {
  token: string | null = null;

  constructor(
    readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `http-${response.status}`;
      let detail = response.statusText;
      try {
        const data = await response.json();
        code = data.error ?? code;
        detail = data.detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, code, detail);
    }
    return response.json() as Promise<T>;
  }

  async login(username: string, password: string): Promise<void> {
    const out = await this.request<{ token: string }>("POST", "/login", {
      username,
      password,
    });
    this.token = out.token;
  }

  register(username: string, password: string): Promise<{ username: string }> {
    return this.request("POST", "/users", { username, password });
  }

  projects(): Promise<{ projects: ProjectInfo[] }> {
    return this.request("GET", "/projects");
  }

  createProject(id: string, name: string): Promise<ProjectInfo> {
    return this.request("POST", "/projects", { id, name });
  }

  entity(project: string, iri: string, includeDeprecated = false): Promise<EntityView> {
    const flag = includeDeprecated ? "?includeDeprecated=true" : "";
    return this.request("GET", `/p/${project}/e/${encodeURIComponent(iri)}${flag}`);
  }

  commit(
    project: string,
    changes: ChangeJson[],
    message: string,
  ): Promise<{ revision: RevisionJson | null; applied: number }> {
    return this.request("POST", `/p/${project}/commit`, { changes, message });
  }

  merge(
    project: string,
    sources: string[],
    target: string,
    message: string,
  ): Promise<{ revision: RevisionJson | null }> {
    return this.request("POST", `/p/${project}/merge`, { sources, target, message });
  }

  move(
    project: string,
    entities: string[],
    newParent: string,
    message: string,
  ): Promise<{ revision: RevisionJson | null }> {
    return this.request("POST", `/p/${project}/move`, {
      entities,
      newParent,
      message,
    });
  }

  revert(project: string, rev: number): Promise<{ revision: RevisionJson | null }> {
    return this.request("POST", `/p/${project}/revert/${rev}`, {});
  }

  history(
    project: string,
    entity?: string,
    limit = 50,
    offset = 0,
  ): Promise<{ revisions: RevisionJson[] }> {
    const params = new URLSearchParams({ limit: String(limit), offset: String(offset) });
    if (entity) params.set("entity", entity);
    return this.request("GET", `/p/${project}/history?${params}`);
  }

  search(project: string, q: string, tag?: string): Promise<{ results: SearchResult[] }> {
    const params = new URLSearchParams({ q });
    if (tag) params.set("tag", tag);
    return this.request("GET", `/p/${project}/search?${params}`);
  }

  tags(project: string): Promise<{ tags: TagJson[] }> {
    return this.request("GET", `/p/${project}/tags`);
  }

  defineTag(project: string, label: string, color: string): Promise<TagJson> {
    return this.request("POST", `/p/${project}/tags`, { label, color });
  }

  tagged(
    project: string,
    tagId: string,
  ): Promise<{ entities: { iri: string; displayName: string }[] }> {
    return this.request("GET", `/p/${project}/tagged/${tagId}`);
  }

  postComment(
    project: string,
    body: string,
    entity?: string,
    thread?: string,
  ): Promise<{ thread: ThreadJson }> {
    return this.request("POST", `/p/${project}/threads`, { entity, body, thread });
  }

  setThreadStatus(
    project: string,
    thread: string,
    status: "open" | "resolved",
  ): Promise<{ thread: ThreadJson }> {
    return this.request("PUT", `/p/${project}/threads/${thread}/status`, { status });
  }

  comments(project: string, sort: string): Promise<{ threads: ThreadJson[] }> {
    return this.request("GET", `/p/${project}/comments?sort=${sort}`);
  }

  settings(project: string): Promise<SettingsJson> {
    return this.request("GET", `/p/${project}/settings`);
  }

  updateSettings(project: string, patch: Partial<SettingsJson>): Promise<SettingsJson> {
    return this.request("PUT", `/p/${project}/settings`, patch);
  }

  members(project: string): Promise<{ members: string[] }> {
    return this.request("GET", `/p/${project}/members`);
  }
}
