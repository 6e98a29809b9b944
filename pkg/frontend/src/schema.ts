/**
 * Wire schemas shared with the pipeline CLI. Bundles are produced by
 * `figchain bundle` and verdict exports are consumed verbatim by
 * `figchain verdicts merge`, so these shapes must not drift.
 */
import { z } from "zod";

export const changeSchema = z.object({
  kind: z.enum(["add", "remove", "modify"]),
  role: z.string().min(1),
  old_ref: z.string().nullable(),
  new_ref: z.string().nullable(),
  facets: z.array(z.enum(["geometry", "style", "text", "structure"])),
  detail: z.record(z.tuple([z.string().nullable(), z.string().nullable()])),
});

export const findingSchema = z.object({
  rule: z.enum(["C1-DATA", "C2-SINGLE-ASPECT", "C2-MSG-FORMAT", "C2-UNDOCUMENTED-CHANGE"]),
  severity: z.enum(["error", "warning"]),
  message: z.string(),
  location: z.string(),
});

export const fidelitySchema = z.object({
  status: z.enum(["pass", "violation", "needs-declared-transform", "no-marks"]),
  mark_changes: z.array(changeSchema),
  fitted_transform: z
    .object({
      scale_x: z.number(),
      scale_y: z.number(),
      translate_x: z.number(),
      translate_y: z.number(),
    })
    .nullable(),
  residual: z.number(),
  declared_transforms: z.array(z.string()),
});

export const diffDocumentSchema = z.object({
  changes: z.array(changeSchema),
  fidelity: fidelitySchema.passthrough(),
  findings: z.array(findingSchema),
});

export const operationSchema = z.object({
  id: z.string().regex(/^Op[1-9]\d*$/),
  commit_ref: z.string(),
  message: z.string().min(1),
  changes: z.array(changeSchema),
  findings: z.array(findingSchema),
  before_svg: z.string().min(1),
  after_svg: z.string().min(1),
});

export const manifestSchema = z.object({
  figure_info: z.object({
    figure_number: z.string().min(1),
    iteration_version: z.string().regex(/^iteration[1-9]\d*-improvement[1-9]\d*$/),
    creation_time: z.string().min(1),
  }),
  author_info: z.object({ name: z.string().min(1), email: z.string().min(1) }),
  operations: z.array(operationSchema).min(1),
  assessment_info: z.object({
    questions: z.unknown(),
    responses_ref: z.unknown(),
    final_score: z.object({
      value: z.number().min(0).max(1),
      rule_name: z.string(),
      n_records: z.number().int().nonnegative(),
    }),
    scoring_method: z.string(),
  }),
});

export const reviewerRoleSchema = z.enum(["climate", "visualization"]);

export const verdictSchema = z
  .object({
    operation_id: z.string().regex(/^Op[1-9]\d*$/),
    decision: z.enum(["approve", "reject"]),
    reviewer: z.object({ name: z.string().min(1), role: reviewerRoleSchema }),
    comment: z.string(),
    timestamp: z.string().min(1),
  })
  .refine((v) => v.decision !== "reject" || v.comment.trim().length > 0, {
    message: "a rejection requires a nonempty comment",
  });

export const verdictsFileSchema = z.array(verdictSchema);

export type DiffDocument = z.infer<typeof diffDocumentSchema>;
export type Manifest = z.infer<typeof manifestSchema>;
export type OperationEntry = z.infer<typeof operationSchema>;
export type Verdict = z.infer<typeof verdictSchema>;
export type ReviewerRole = z.infer<typeof reviewerRoleSchema>;
