/**
 * DOM layer: renders the view-model into the page and polls the gateway
 * every 2 seconds. All state lives in ConsoleModel; this file only draws.
 */
import { GatewayClient } from "./api.js";
import { featureBars, formatContribution, formatScore, highlightSegments, LABEL_BADGES } from "./format.js";
import { ConsoleModel } from "./model.js";
const POLL_MS = 2000;
const model = new ConsoleModel(new GatewayClient(""), "console-moderator");
function el(tag, attrs = {}, ...children) {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        if (key === "class")
            node.className = value;
        else if (key === "title")
            node.title = value;
        else
            node.setAttribute(key, value);
    }
    node.append(...children);
    return node;
}
function renderQueue(root) {
    root.replaceChildren();
    const { queue, idle } = model.state;
    if (idle) {
        root.append(el("div", { class: "idle-stats" }, `providers idle ${idle.idle}/${idle.total} (${idle.idle_pct.toFixed(1)}%)`));
    }
    if (!queue.length) {
        root.append(el("div", { class: "empty" }, "No seekers waiting."));
        return;
    }
    for (const entry of queue) {
        const row = el("div", { class: "queue-row", "data-ss": entry.ss_id }, el("strong", {}, entry.ss_id), el("span", { class: "conds" }, entry.conditions.join(", ") || "untagged"), el("span", { class: "preview" }, entry.preview));
        row.addEventListener("click", () => {
            void model.openSS(entry.ss_id).then(() => model.loadRecommendations(4));
        });
        root.append(row);
    }
}
function renderDetail(root) {
    root.replaceChildren();
    const detail = model.state.detail;
    if (!detail) {
        root.append(el("div", { class: "empty" }, "Select a seeker from the queue."));
        return;
    }
    const text = el("p", { class: "ss-text" });
    for (const seg of highlightSegments(detail.tokens, detail.highlights)) {
        if (seg.lexicon) {
            text.append(el("mark", { class: `hl-${seg.lexicon}`, title: `${seg.lexicon}: ${seg.concept}` }, seg.text + " "));
        }
        else {
            text.append(seg.text + " ");
        }
    }
    const bars = el("div", { class: "bars" });
    for (const bar of featureBars(detail.features)) {
        bars.append(el("div", { class: "bar-row" }, el("span", { class: "bar-name" }, bar.name), el("div", { class: "bar-outer" }, el("div", { class: "bar-inner", style: `width:${Math.min(100, bar.value * 100)}%` })), el("span", { class: "bar-value" }, bar.value.toFixed(3))));
    }
    root.append(el("h2", {}, `${detail.ss_id} (${detail.user_id})`), el("div", { class: "tags" }, `conditions: ${detail.tags.conditions.join(", ") || "none"} | events: ${detail.tags.events.join(", ") || "none"} | p_ss ${detail.p_ss.toFixed(2)}`), text, bars);
}
function renderRecommendations(root) {
    root.replaceChildren();
    const rec = model.state.recommendation;
    if (!rec)
        return;
    for (const entry of rec.entries) {
        const badge = entry.label ? LABEL_BADGES[entry.label] : undefined;
        const chips = el("div", { class: "chips" });
        for (const chip of entry.explanation) {
            chips.append(el("span", { class: "chip" }, `${chip.feature} ${formatContribution(chip.contribution)}`));
        }
        const disabled = model.state.disabledSps.has(entry.sp_id);
        const confirmed = model.state.confirmedSp === entry.sp_id;
        const confirmBtn = el("button", { class: "confirm" }, confirmed ? "confirmed" : "confirm match");
        confirmBtn.disabled = disabled || model.state.confirmedSp !== null;
        confirmBtn.addEventListener("click", () => void model.confirm(entry.sp_id));
        const pick = el("input", { type: "checkbox", "data-sp": entry.sp_id });
        pick.checked = model.state.feedbackSelection.has(entry.sp_id);
        pick.addEventListener("change", () => model.toggleFeedbackSelection(entry.sp_id));
        root.append(el("div", { class: "card" + (disabled ? " disabled" : ""), "data-sp": entry.sp_id }, el("div", { class: "card-head" }, el("strong", {}, entry.sp_id), el("span", { class: "score", title: "match score from the model" }, formatScore(entry.score)), entry.label
            ? el("span", { class: "badge", style: `background:${badge?.color ?? "#555"}`, title: badge?.tooltip ?? "" }, entry.label)
            : el("span", { class: "badge" }, "unlabeled")), el("p", { class: "sp-text" }, entry.sp_text), chips, el("label", { class: "pick" }, pick, " relevant"), confirmBtn));
    }
}
function renderFeedback(root) {
    root.replaceChildren();
    if (!model.state.recommendation)
        return;
    const slider = el("input", { type: "range", min: "1", max: "10", step: "1", value: String(model.state.confidence) });
    slider.addEventListener("input", () => model.setConfidence(Number(slider.value)));
    const cohort = el("input", { type: "text", value: model.state.cohort });
    cohort.addEventListener("change", () => model.setCohort(cohort.value));
    const submit = el("button", { class: "submit" }, "submit feedback");
    submit.addEventListener("click", () => void model.submitFeedback());
    root.append(el("h3", {}, "Expert feedback"), el("div", {}, `selected ${model.state.feedbackSelection.size} of ${model.state.recommendation.entries.length}`), el("label", {}, `confidence ${model.state.confidence}/10 `, slider), el("label", {}, "cohort ", cohort), submit);
    const agg = model.state.aggregate;
    if (agg) {
        const table = el("table", { class: "agg" });
        table.append(el("tr", {}, el("th", {}, "cohort"), el("th", {}, "condition"), el("th", {}, "mean selected"), el("th", {}, "mean confidence"), el("th", {}, "n")));
        for (const [cohortName, conditions] of Object.entries(agg)) {
            for (const [condition, cell] of Object.entries(conditions)) {
                table.append(el("tr", {}, el("td", {}, cohortName), el("td", {}, condition), el("td", {}, cell.mean_selected.toFixed(2)), el("td", {}, cell.mean_confidence.toFixed(2)), el("td", {}, String(cell.n))));
            }
        }
        root.append(table);
    }
}
function renderError(root) {
    root.replaceChildren();
    if (model.state.error) {
        root.append(el("div", { class: "error-banner" }, model.state.error));
    }
}
function renderAll() {
    renderError(document.getElementById("error"));
    renderQueue(document.getElementById("queue"));
    renderDetail(document.getElementById("detail"));
    renderRecommendations(document.getElementById("recommendations"));
    renderFeedback(document.getElementById("feedback"));
}
model.subscribe(renderAll);
void model.loadQueue();
void model.refreshIdle();
void model.refreshAggregate();
setInterval(() => {
    void model.loadQueue();
    void model.refreshIdle();
}, POLL_MS);
