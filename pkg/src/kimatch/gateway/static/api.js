/**
 * Typed client for the gateway HTTP API. Every view value on screen comes
 * from one of these payloads; the console never derives or rewrites them.
 */
export class ApiError extends Error {
    constructor(code, message, status) {
        super(message);
        this.code = code;
        this.status = status;
    }
}
export class GatewayClient {
    constructor(baseUrl = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        let resp;
        try {
            resp = await this.fetchImpl(this.baseUrl + path, init);
        }
        catch (err) {
            throw new ApiError("network", String(err), 0);
        }
        const body = await resp.json().catch(() => ({}));
        if (!resp.ok) {
            throw new ApiError(body.code ?? "http_error", body.message ?? resp.statusText, resp.status);
        }
        return body;
    }
    loadQueue() {
        return this.request("/queue");
    }
    openSS(ssId) {
        return this.request(`/ss/${encodeURIComponent(ssId)}`);
    }
    recommendations(ssId, k = 4) {
        return this.request(`/ss/${encodeURIComponent(ssId)}/recommendations?k=${k}`);
    }
    confirm(ssId, spId, moderator) {
        return this.request("/matches/confirm", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ ss_id: ssId, sp_id: spId, moderator }),
        });
    }
    releaseSp(spId) {
        return this.request(`/sps/${encodeURIComponent(spId)}/release`, { method: "POST" });
    }
    idleStats() {
        return this.request("/stats/idle");
    }
    submitFeedback(body) {
        return this.request("/feedback", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    aggregate() {
        return this.request("/feedback/aggregate");
    }
}
