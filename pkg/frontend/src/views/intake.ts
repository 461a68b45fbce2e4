/** Client-side validation for the source intake form. Mirrors the API's
 * own rules so obvious mistakes get inline errors before any request;
 * the API remains the authority and its 400s are surfaced the same way. */

const DOMAIN_RE = /^(?=.{1,253}$)([a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?\.)+[a-z]{2,}$/;

export interface IntakeForm {
  domain: string;
  trustScore: string;
  historyUrlTemplate: string;
  articleLinkSelector: string;
}

export type IntakeErrors = Partial<Record<keyof IntakeForm, string>>;

export function validateIntake(form: IntakeForm): IntakeErrors {
  const errors: IntakeErrors = {};
  if (!DOMAIN_RE.test(form.domain.trim().toLowerCase())) {
    errors.domain = "enter a bare domain like example.com";
  }
  const score = Number(form.trustScore);
  if (!Number.isInteger(score) || score < 0 || score > 100) {
    errors.trustScore = "trust score must be an integer from 0 to 100";
  }
  const placeholders = form.historyUrlTemplate.split("{page}").length - 1;
  if (placeholders !== 1) {
    errors.historyUrlTemplate =
      "history URL template must contain {page} exactly once";
  }
  if (!form.articleLinkSelector.trim()) {
    errors.articleLinkSelector = "article link selector is required";
  }
  return errors;
}

export function isValid(errors: IntakeErrors): boolean {
  return Object.keys(errors).length === 0;
}
