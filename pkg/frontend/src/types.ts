// Shared wire types for the audit service API (/api/v1/*), validated at the
// boundary with zod so a drifting server payload fails loudly.

import { z } from "zod";

export const AUDIT_STAGES = [
  "relevance",
  "sector",
  "predictor",
  "rdc",
  "pair-status",
] as const;

export type Stage = (typeof AUDIT_STAGES)[number];

// Label vocabularies mirror the server's closed stage vocabularies exactly;
// options arrive with each task and are checked against these.
export const STAGE_VOCABULARY: Record<Stage, readonly string[]> = {
  relevance: ["Relevant", "Not relevant"],
  sector: [
    "banking_finance",
    "healthcare_pharma",
    "insurance",
    "ecommerce_retail",
    "telecom_network_security",
    "social_media",
    "education_learning_analytics",
    "iot_smart_systems",
    "government_public_admin",
    "cybersecurity_intrusion_detection",
    "hr_recruitment",
    "transportation_logistics",
    "none_of_the_above",
  ],
  predictor: ["Valid", "Not valid"],
  rdc: [
    "Identifier_PII",
    "Contact_Info",
    "Device_OnlineID",
    "Biometric",
    "Location_IoT",
    "Health_Clinical",
    "Financial",
    "Child_Data",
    "Demographic",
    "Behavioural",
    "Environmental",
    "Operational_Business",
    "Other",
  ],
  "pair-status": ["Regulated", "Not Regulated"],
};

const fragmentSchema = z.object({
  regulation: z.string(),
  article_ref: z.string(),
  text: z.string(),
});

// Evidence fields only: the blinded payload never carries AI labels.
const payloadSchema = z
  .object({
    title: z.string().optional(),
    abstract: z.string().optional(),
    venue: z.string().optional(),
    keywords: z.array(z.string()).optional(),
    predictor: z.string().optional(),
    rdc: z.string().optional(),
    predictors: z.array(z.object({ name: z.string(), evidence: z.string() })).optional(),
    fragments: z.array(fragmentSchema).optional(),
  })
  .strict();

export const taskViewSchema = z.object({
  done: z.literal(false),
  task_id: z.string(),
  stage: z.enum(AUDIT_STAGES),
  stratum: z.string(),
  payload: payloadSchema,
  options: z.array(z.string()).nonempty(),
});

export const doneSchema = z.object({ done: z.literal(true) });

export const fetchResponseSchema = z.union([doneSchema, taskViewSchema]);

export type ConsoleTaskView = z.infer<typeof taskViewSchema>;

export const submitAckSchema = z.object({
  ok: z.literal(true),
  task_id: z.string(),
  label: z.string(),
});

const progressCellSchema = z.object({
  done: z.number(),
  total: z.number(),
  remaining_weight: z.number(),
});

export const progressSchema = z.record(z.record(progressCellSchema));

export type ProgressSummary = z.infer<typeof progressSchema>;

export interface LabelRecord {
  task_id: string;
  stage: Stage;
  label: string;
  reviewer: string;
}
