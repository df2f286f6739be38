//! Regenerates `data/sample-bank.json`.
//!
//! The sample bank is synthetic: four ITSM processes, 46 process-specific
//! PA1.1 questions (12/12/11/11), 127 generic questions over PA2.1..PA5.2
//! (16 per attribute, 15 for PA5.2) and 151 knowledge items. The 22
//! questions without a knowledge item are the last two PA1.1 questions of
//! each process and the last two questions of PA2.1..PA5.1.
//!
//! Role tags follow the question's orientation:
//! manager-oriented -> ProcessManager, activity -> ProcessPerformer,
//! outcome -> all three roles.
//!
//! Usage: `cargo run -p procap-core --example gen_sample_bank > data/sample-bank.json`

use procap_core::model::{ProcessAttribute, ProcessId, ProcessRef, Role};
use procap_core::{ContentBank, KnowledgeItem, Question, QuestionScope};

#[derive(Clone, Copy)]
enum Kind {
    Manager,
    Activity,
    Outcome,
}
use Kind::*;

impl Kind {
    fn roles(self) -> Vec<Role> {
        match self {
            Manager => vec![Role::ProcessManager],
            Activity => vec![Role::ProcessPerformer],
            Outcome => Role::ALL.to_vec(),
        }
    }
}

type Practice = (&'static str, &'static str, Kind);

const SLM: &[Practice] = &[
    ("the service catalogue is kept current", "Review the service catalogue at every change of service scope", Manager),
    ("service level requirements are agreed with customers", "Capture service level requirements in a signed-off document before design", Manager),
    ("service level agreements are documented for every live service", "Maintain one agreement per live service with named owners", Manager),
    ("underpinning contracts support the agreed service levels", "Map each agreed target to the supplier contract that underpins it", Manager),
    ("service performance is measured against agreed targets", "Automate measurement of availability and response targets", Activity),
    ("service reports are produced for customers", "Publish service reports on an agreed cycle", Activity),
    ("service reviews are held with customers", "Hold regular service reviews and minute the actions agreed", Activity),
    ("breaches of service levels are investigated", "Trigger a documented review for every target breach", Activity),
    ("service improvement plans are raised for under-performing services", "Raise a service improvement plan whenever a target trend degrades", Activity),
    ("customer satisfaction is surveyed", "Survey customer satisfaction periodically and track the trend", Outcome),
    ("operational level agreements exist between internal teams", "Agree operational level agreements for every internal support team", Manager),
    ("customers understand the agreed service levels", "Communicate agreed targets in plain language to service users", Outcome),
];

const CHG: &[Practice] = &[
    ("every change is recorded as a request for change", "Record every change in a single change register", Activity),
    ("changes are classified by risk and impact", "Apply a documented risk and impact classification to each change", Activity),
    ("a change advisory board reviews significant changes", "Convene a change advisory board for all significant changes", Manager),
    ("changes are authorised before implementation", "Block implementation until authorisation is recorded", Manager),
    ("standard changes are pre-approved and documented", "Define standard changes with a pre-approved procedure", Manager),
    ("emergency changes follow a defined procedure", "Define and rehearse the emergency change procedure", Activity),
    ("change implementation is scheduled and communicated", "Publish a forward schedule of changes", Activity),
    ("back-out plans exist for changes", "Require a tested back-out plan for each change", Activity),
    ("changes are reviewed after implementation", "Perform post-implementation reviews for significant changes", Activity),
    ("failed changes are analysed", "Analyse every failed change and record lessons learned", Manager),
    ("unauthorised changes are detected", "Reconcile configuration data against authorised changes", Outcome),
    ("users are informed about changes that affect them", "Notify affected users before and after each change", Outcome),
];

const PRB: &[Practice] = &[
    ("identified problems are logged", "Log every identified problem in the problem register", Activity),
    ("problems are categorised and prioritised", "Apply the same categorisation scheme used for incidents", Activity),
    ("root cause analysis is performed for problems", "Use a structured root cause technique for each major problem", Activity),
    ("known errors are recorded", "Record each known error with its workaround", Activity),
    ("workarounds are made available to the service desk", "Publish workarounds in the service desk knowledge base", Outcome),
    ("trend analysis of incidents is performed", "Analyse incident trends to find problems proactively", Manager),
    ("major problems are reviewed", "Hold a major problem review after resolution", Manager),
    ("problem resolution is raised as a change where needed", "Raise a request for change for every structural fix", Activity),
    ("problem records are closed only when the cause is removed", "Close problem records only after verifying the fix", Manager),
    ("problem management responsibilities are assigned", "Assign a problem owner for each open problem", Manager),
    ("recurring incidents decrease over time", "Track recurring incidents as a problem management outcome", Outcome),
];

const CFG: &[Practice] = &[
    ("configuration items are identified", "Define which components are configuration items and why", Manager),
    ("a configuration management database is maintained", "Maintain one authoritative configuration database", Activity),
    ("relationships between configuration items are recorded", "Record dependencies between configuration items", Activity),
    ("configuration baselines are established", "Establish baselines before significant changes", Activity),
    ("configuration records are updated with each change", "Make configuration updates part of change closure", Activity),
    ("configuration audits are carried out", "Audit configuration records against the live estate", Manager),
    ("configuration item status is tracked through its lifecycle", "Track each item from planned through retired", Activity),
    ("access to configuration data is controlled", "Restrict update rights on configuration data", Manager),
    ("configuration data is used by other processes", "Expose configuration data to incident, problem and change", Outcome),
    ("configuration management scope is documented", "Document the scope and depth of configuration control", Manager),
    ("configuration data is trusted by its users", "Measure and publish configuration data accuracy", Outcome),
];

const PA21: &[Practice] = &[
    ("objectives for the performance of the process are identified", "Set measurable performance objectives for the process", Manager),
    ("the scope of the process is defined", "Document what the process covers and excludes", Manager),
    ("performance of the process is planned", "Plan process activities against its objectives", Manager),
    ("performance of the process is monitored against plans", "Monitor process performance against the plan", Activity),
    ("performance of the process is adjusted when plans are not met", "Take corrective action when performance deviates", Manager),
    ("responsibilities for performing the process are defined", "Define and publish process responsibilities", Manager),
    ("authorities for performing the process are assigned", "Assign authorities that match responsibilities", Manager),
    ("people performing the process are competent", "Assess and develop competence of process staff", Outcome),
    ("resources needed to perform the process are identified", "Identify staff, tools and budget the process needs", Manager),
    ("resources needed to perform the process are made available", "Secure the identified resources for the process", Manager),
    ("interfaces between involved parties are managed", "Agree and document interfaces between teams", Activity),
    ("communication between involved parties is effective", "Establish regular communication channels for the process", Outcome),
    ("schedules for process activities are maintained", "Keep process activity schedules current", Activity),
    ("process milestones are tracked", "Track process milestones and report slippage", Activity),
    ("process performance issues are escalated", "Define escalation routes for performance issues", Activity),
    ("process performance is reported to management", "Report process performance to management regularly", Outcome),
];

const PA22: &[Practice] = &[
    ("requirements for process work products are defined", "Define requirements for every process work product", Manager),
    ("requirements for documentation of work products are defined", "Specify documentation standards for work products", Manager),
    ("work products are identified", "Keep a list of process work products", Activity),
    ("work products are documented", "Document work products using agreed templates", Activity),
    ("work products are placed under version control", "Version-control all process work products", Activity),
    ("work products are reviewed against their requirements", "Review work products against their requirements", Activity),
    ("work product reviews are planned", "Plan work product reviews in the process schedule", Manager),
    ("defects found in work products are resolved", "Track work product defects to closure", Activity),
    ("approval of work products is recorded", "Record approval of each work product", Manager),
    ("changes to work products are controlled", "Control changes to approved work products", Activity),
    ("access to work products is managed", "Manage access rights to work products", Manager),
    ("work products are stored securely", "Store work products in a secure repository", Activity),
    ("obsolete work products are withdrawn", "Withdraw and archive obsolete work products", Activity),
    ("work product quality criteria are communicated", "Communicate quality criteria to authors", Manager),
    ("work products meet the needs of their users", "Gather feedback on work products from their users", Outcome),
    ("work products are available when needed", "Make current work products easy to find", Outcome),
];

const PA31: &[Practice] = &[
    ("a standard process is defined", "Define a standard process description", Manager),
    ("the standard process includes tailoring guidelines", "Provide guidelines for tailoring the standard process", Manager),
    ("the sequence of process activities is defined", "Define the sequence and interaction of activities", Manager),
    ("interaction with other processes is defined", "Describe inputs and outputs shared with other processes", Manager),
    ("competencies required for the process are defined", "Define the competencies each process role needs", Manager),
    ("infrastructure required for the process is defined", "Define the tools and infrastructure the process needs", Manager),
    ("the work environment required for the process is defined", "Describe the work environment the process relies on", Manager),
    ("methods for monitoring the process are defined", "Define how process effectiveness is monitored", Manager),
    ("the standard process is documented", "Publish the process documentation centrally", Activity),
    ("the standard process is approved by management", "Obtain management approval of the process definition", Manager),
    ("the standard process is maintained", "Review the process definition periodically", Manager),
    ("the standard process aligns with organisational policy", "Trace the process definition to organisational policy", Manager),
    ("process roles are described in the standard process", "Describe each process role in the definition", Activity),
    ("process inputs and outputs are described", "List the inputs and outputs of each activity", Activity),
    ("the standard process is understood by those who use it", "Brief staff on the standard process", Outcome),
    ("the standard process reflects current practice", "Compare the definition with how work is really done", Outcome),
];

const PA32: &[Practice] = &[
    ("the defined process is deployed from the standard process", "Deploy the process from the standard definition", Manager),
    ("process roles are assigned to people", "Assign named people to each process role", Manager),
    ("people are trained for their process roles", "Train people before they take on process roles", Manager),
    ("required competence is verified before assignment", "Verify competence before assigning a role", Manager),
    ("required resources are provided for the deployed process", "Provide the resources the deployed process requires", Manager),
    ("required information is available for the deployed process", "Make process information available at point of use", Activity),
    ("required infrastructure is available for the deployed process", "Provision the infrastructure the process requires", Activity),
    ("the work environment supports the deployed process", "Maintain a work environment that supports the process", Activity),
    ("data about process performance is collected", "Collect data on how the deployed process performs", Activity),
    ("process data is analysed to understand behaviour", "Analyse collected data to understand process behaviour", Activity),
    ("the suitability of the process is evaluated", "Evaluate whether the process remains suitable", Manager),
    ("the effectiveness of the process is evaluated", "Evaluate whether the process achieves its purpose", Manager),
    ("improvement opportunities are identified from process data", "Record improvement opportunities found in process data", Activity),
    ("deviations from the defined process are managed", "Approve and record any deviation from the process", Activity),
    ("the deployed process is followed consistently", "Check that the process is followed across teams", Outcome),
    ("stakeholders experience a consistent process", "Ask stakeholders whether the process is consistent", Outcome),
];

const PA41: &[Practice] = &[
    ("process information needs are established", "Identify what process information stakeholders need", Manager),
    ("process measurement objectives are derived from information needs", "Derive measurement objectives from information needs", Manager),
    ("quantitative objectives for process performance are established", "Set quantitative targets for process performance", Manager),
    ("process measures are identified", "Define measures that support each objective", Manager),
    ("measurement data collection is defined", "Define how and when measurement data is collected", Activity),
    ("measurement data is collected as defined", "Collect measurement data consistently", Activity),
    ("measurement data is validated", "Validate measurement data before use", Activity),
    ("measurement data is stored for analysis", "Store measurement data in an accessible repository", Activity),
    ("measurement results are analysed", "Analyse measurement results against targets", Activity),
    ("measurement results are reported to stakeholders", "Report measurement results to stakeholders", Outcome),
    ("measurement results are used to characterise process performance", "Use results to characterise how the process performs", Manager),
    ("process performance is compared with quantitative objectives", "Compare actual performance with quantitative targets", Manager),
    ("measurement tools are maintained", "Maintain the tools that support measurement", Activity),
    ("measurement definitions are documented", "Document each measure's definition and formula", Activity),
    ("measurement supports management decisions", "Use measurement results in management decisions", Outcome),
    ("measurement results are trusted by stakeholders", "Publish data quality alongside measurement results", Outcome),
];

const PA42: &[Practice] = &[
    ("analysis techniques for process control are selected", "Select statistical techniques for process control", Manager),
    ("control limits are established for process measures", "Establish control limits for key process measures", Manager),
    ("process data is analysed for special causes of variation", "Analyse process data for special causes of variation", Activity),
    ("corrective actions address special causes of variation", "Act on special causes of variation", Activity),
    ("control limits are re-established after corrective action", "Recalculate control limits after corrective action", Activity),
    ("process variation is kept within defined limits", "Monitor variation against defined limits", Activity),
    ("process control results are reported", "Report process control results to management", Outcome),
    ("responsibilities for process control are assigned", "Assign responsibility for process control", Manager),
    ("process control data is retained", "Retain process control data for trend analysis", Activity),
    ("process control is reviewed periodically", "Review the effectiveness of process control", Manager),
    ("process behaviour is predictable", "Track whether outcomes fall within predicted ranges", Outcome),
    ("process performance trends are monitored", "Monitor long-term performance trends", Activity),
    ("deviations from expected behaviour trigger investigation", "Investigate every unexpected deviation", Activity),
    ("process control techniques are understood by staff", "Train staff in process control techniques", Manager),
    ("tools supporting process control are available", "Provide tools for process control charts", Activity),
    ("management relies on process predictability for planning", "Use process predictability in capacity and service planning", Outcome),
];

const PA51: &[Practice] = &[
    ("process improvement objectives are defined", "Define improvement objectives aligned with business goals", Manager),
    ("improvement objectives support business goals", "Trace improvement objectives to business goals", Manager),
    ("process data is analysed to identify common causes of variation", "Analyse data for common causes of variation", Activity),
    ("improvement opportunities arising from new technology are identified", "Scan new technology for improvement opportunities", Manager),
    ("improvement opportunities arising from new concepts are identified", "Evaluate new practices and concepts for adoption", Manager),
    ("an implementation strategy for improvements is established", "Establish a strategy for implementing improvements", Manager),
    ("improvement proposals are collected from staff", "Collect improvement proposals from process staff", Activity),
    ("improvement proposals are evaluated", "Evaluate improvement proposals against objectives", Manager),
    ("best practices from other parts of the organisation are considered", "Share best practices across organisational units", Manager),
    ("benchmarking is used to identify improvements", "Benchmark the process against peers", Manager),
    ("customer feedback drives process innovation", "Use customer feedback as an input to innovation", Outcome),
    ("innovation activities are resourced", "Fund and resource innovation activities", Manager),
    ("staff are encouraged to suggest improvements", "Recognise staff who suggest improvements", Outcome),
    ("lessons learned are captured", "Capture lessons learned after each improvement cycle", Activity),
    ("improvement ideas are prioritised", "Prioritise improvement ideas by value and effort", Manager),
    ("stakeholders are engaged in process innovation", "Engage stakeholders in shaping improvements", Outcome),
];

const PA52: &[Practice] = &[
    ("the impact of proposed changes to the process is assessed", "Assess the impact of each proposed process change", Manager),
    ("process changes are piloted before deployment", "Pilot process changes before full deployment", Activity),
    ("implementation of process changes is managed", "Manage process changes as a project", Manager),
    ("process changes are communicated to affected parties", "Communicate process changes to all affected parties", Activity),
    ("training is provided for process changes", "Train staff on changed process elements", Activity),
    ("the effectiveness of process changes is evaluated", "Evaluate the effect of changes against objectives", Manager),
    ("process changes are rolled back when ineffective", "Define rollback criteria for process changes", Manager),
    ("the standard process is updated after changes", "Update the standard definition after each change", Activity),
    ("the results of process changes are measured", "Measure results before and after each change", Activity),
    ("process optimisation is continuous", "Schedule optimisation reviews as a continuous activity", Manager),
    ("the continual improvement register is maintained", "Maintain a continual improvement register", Activity),
    ("optimisation results are reported to management", "Report optimisation results to management", Outcome),
    ("optimisation decisions are based on data", "Base optimisation decisions on measured data", Manager),
    ("customers notice improvements to the service", "Ask customers whether they notice improvements", Outcome),
    ("the process adapts to changing business needs", "Review the process whenever business needs change", Outcome),
];

fn main() {
    let processes = [
        ("SLM", "Service Level Management", SLM),
        ("CHG", "Change Management", CHG),
        ("PRB", "Problem Management", PRB),
        ("CFG", "Configuration Management", CFG),
    ];
    let generic = [
        (ProcessAttribute::PA2_1, PA21),
        (ProcessAttribute::PA2_2, PA22),
        (ProcessAttribute::PA3_1, PA31),
        (ProcessAttribute::PA3_2, PA32),
        (ProcessAttribute::PA4_1, PA41),
        (ProcessAttribute::PA4_2, PA42),
        (ProcessAttribute::PA5_1, PA51),
        (ProcessAttribute::PA5_2, PA52),
    ];

    let mut questions = Vec::new();
    let mut items = Vec::new();
    let mut push = |id: String,
                    attribute: ProcessAttribute,
                    scope: QuestionScope,
                    (practice, guidance, kind): Practice,
                    with_item: bool| {
        let knowledge_item = with_item.then(|| {
            let kid = format!("K-{id}");
            items.push(KnowledgeItem {
                id: kid.clone(),
                observation: format!("Respondents indicate that {practice} is not performed well."),
                recommendation: format!("{guidance}. Record the owner and review progress at the next assessment."),
            });
            kid
        });
        questions.push(Question {
            id,
            attribute,
            scope,
            text: format!("Do you know if {practice}?"),
            roles: kind.roles(),
            knowledge_item,
        });
    };

    for (pid, _, practices) in &processes {
        let n = practices.len();
        for (i, p) in practices.iter().enumerate() {
            push(
                format!("{pid}-{:02}", i + 1),
                ProcessAttribute::PA1_1,
                QuestionScope::Process(ProcessId::new(*pid)),
                *p,
                i + 2 < n,
            );
        }
    }
    for (attr, practices) in &generic {
        let n = practices.len();
        let short = attr.id().trim_start_matches("PA");
        for (i, p) in practices.iter().enumerate() {
            let with_item = *attr == ProcessAttribute::PA5_2 || i + 2 < n;
            push(
                format!("GEN-{short}-{:02}", i + 1),
                *attr,
                QuestionScope::Generic,
                *p,
                with_item,
            );
        }
    }

    let bank = ContentBank::from_parts(
        processes
            .iter()
            .map(|(id, name, _)| ProcessRef {
                id: ProcessId::new(*id),
                name: name.to_string(),
            })
            .collect(),
        questions,
        items,
    )
    .expect("sample bank is valid");
    println!("{}", bank.to_json());
}
