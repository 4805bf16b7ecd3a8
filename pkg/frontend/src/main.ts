import { ApiClient } from "./api.js";
import { renderForm } from "./form.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";

const container = document.getElementById("form")!;
const status = document.getElementById("status")!;
const output = document.getElementById("output")!;

renderForm(new ApiClient(baseUrl), container)
  .then((form) => {
    status.textContent = `connected to ${baseUrl}`;
    const button = document.getElementById("submit")!;
    button.addEventListener("click", () => {
      const payload = form.submit();
      output.textContent = payload
        ? `submitted: ${JSON.stringify(payload, null, 2)}`
        : "submission blocked: required fields are missing";
    });
  })
  .catch((err) => {
    status.textContent = `service unreachable at ${baseUrl}: ${err}`;
  });
