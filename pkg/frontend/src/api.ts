/** Typed client for the recovery service HTTP/JSON contract. */

export interface ColormapJson {
  n?: number;
  control_points: number[][];
  knots?: number[];
  name?: string;
}

export interface JobProgress {
  done: number;
  total: number;
}

export interface JobSnapshot {
  jobId: string;
  status: "queued" | "running" | "done" | "failed";
  progress: JobProgress;
  error?: string;
  colormap?: ColormapJson;
  controlPoints?: number[][];
  histogram?: number[];
  preview?: string;
  converged?: boolean;
  direction?: string;
  iterations?: number;
}

export interface RecoverConfig {
  iterations?: number;
  learning_rate?: number;
  seed?: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return body.error ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async recover(image: Blob, config?: RecoverConfig): Promise<string> {
    const form = new FormData();
    form.append("image", image, "upload.png");
    if (config) form.append("config", JSON.stringify(config));
    const response = await fetch(this.url("/api/recover"), { method: "POST", body: form });
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return (await response.json()).jobId;
  }

  async getJob(jobId: string): Promise<JobSnapshot> {
    const response = await fetch(this.url(`/api/jobs/${jobId}`));
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return response.json();
  }

  /** Polls every `intervalMs` until the job is done or failed. */
  async trackJob(
    jobId: string,
    onProgress: (snapshot: JobSnapshot) => void,
    intervalMs = 500,
  ): Promise<JobSnapshot> {
    for (;;) {
      const snapshot = await this.getJob(jobId);
      onProgress(snapshot);
      if (snapshot.status === "done") return snapshot;
      if (snapshot.status === "failed") {
        throw new ApiError(500, snapshot.error ?? "recovery failed");
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  async recolor(jobId: string, colormap: ColormapJson): Promise<Blob> {
    const response = await fetch(this.url("/api/recolor"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ jobId, colormap }),
    });
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return response.blob();
  }

  async transfer(
    fieldCsv: Blob,
    source: { jobId: string } | { colormap: ColormapJson },
  ): Promise<Blob> {
    const form = new FormData();
    form.append("field", fieldCsv, "field.csv");
    if ("jobId" in source) form.append("jobId", source.jobId);
    else form.append("colormap", JSON.stringify(source.colormap));
    const response = await fetch(this.url("/api/transfer"), { method: "POST", body: form });
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return response.blob();
  }

  async colormaps(): Promise<ColormapJson[]> {
    const response = await fetch(this.url("/api/colormaps"));
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return response.json();
  }
}
