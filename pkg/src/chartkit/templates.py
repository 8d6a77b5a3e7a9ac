"""Question and instruction template banks used by the QA generator.

Slots use str.format-style names: ``{first_x_axis}``/``{second_x_axis}``
are category names, ``{first_y_axis}``/``{second_y_axis}``/``{y_axis}``
are series names, ``{x_axis}`` is a category name.
"""

REASONING_SINGLE_SERIES = [
    ("reasoning/sum_two", "What is the sum of {first_x_axis} and {second_x_axis} in this chart?"),
    ("reasoning/diff_two", "What is the difference of {first_x_axis} and {second_x_axis} in this chart?"),
    ("reasoning/mean_two", "What is the mean value of {first_x_axis} and {second_x_axis} in this chart?"),
]

REASONING_WHOLE_CHART = [
    ("reasoning/sum_all", "What is the total sum of all the elements in this chart?"),
    ("reasoning/mean_all", "What is the mean value of all the elements in this chart?"),
]

REASONING_MULTI_SERIES = [
    ("reasoning/sum_two_series",
     "What is the sum of {first_x_axis} in {first_y_axis} and {second_x_axis} in {second_y_axis} in this chart?"),
    ("reasoning/mean_two_series",
     "What is the mean value of {first_x_axis} in {first_y_axis} and {second_x_axis} in {second_y_axis} in this chart?"),
    ("reasoning/diff_two_series",
     "What is the difference of {first_x_axis} in {first_y_axis} and {second_x_axis} in {second_y_axis} in this chart?"),
]

EXTREMUM = {
    ("bar", "max"): ("extremum/max_bar", "What is the maximum value in this bar chart?"),
    ("bar", "min"): ("extremum/min_bar", "What is the minimum value in this bar chart?"),
    ("line", "max"): ("extremum/max_line", "What is the maximum value in this line chart?"),
    ("line", "min"): ("extremum/min_line", "What is the minimum value in this line chart?"),
    ("pie", "max"): ("extremum/max_pie", "What is the maximum value in this pie chart?"),
    ("pie", "min"): ("extremum/min_pie", "What is the minimum value in this pie chart?"),
}

RANGE = {
    "bar": ("range/bar", "What is the range of values in this bar chart?"),
    "line": ("range/line", "What is the range of values in this line chart?"),
    "pie": ("range/pie", "What is the range of values in this pie chart?"),
}

RETRIEVAL_COUNT = {
    "bar": ("retrieval/count_bars", "How many bars are there in this bar chart?"),
    "pie": ("retrieval/count_pieces", "How many pieces are there in this pie chart?"),
}

RETRIEVAL_VALUE_SINGLE = ("retrieval/value", "What is the value of {x_axis} in this chart?")
RETRIEVAL_VALUE_SERIES = ("retrieval/value_in_series", "What is the value of {x_axis} in {y_axis}?")

CHART_TO_TABLE_INSTRUCTIONS = [
    "Extract and organize the data from the chart into a clear and concise table.",
    "Create a detailed table reflecting the exact data points and categories shown in the chart.",
    "Reconstruct the chart's data into a structured table, ensuring all elements are captured.",
    "Translate the chart into a data table with precise values and labels as displayed.",
    "Convert the charted information into a comprehensive table, including all relevant details.",
    "Develop a tabular summary that encapsulates all the quantitative information from the chart.",
    "Compile the data depicted in the chart into a well-organized table for easy interpretation.",
    "Arrange the information contained within the chart into a methodical and detailed data table.",
    "Replicate the chart's information accurately in table format, with corresponding data entries.",
    "Catalog the chart data into a table, mirroring the exact figures and trends shown.",
    "Transcribe the visual data points from the chart into a systematic table format.",
]

BRIEF_DESCRIPTION_INSTRUCTIONS = [
    "Describe the image concisely.",
    "Provide a brief description of the given image.",
    "Offer a succinct explanation of the picture presented.",
    "Summarize the visual content of the image.",
    "Give a short and clear explanation of the subsequent image.",
    "Share a concise interpretation of the image provided.",
    "Present a compact description of the photo's key features.",
    "Relay a brief, clear account of the picture shown.",
    "Render a clear and concise summary of the photo.",
]

DETAILED_DESCRIPTION_INSTRUCTIONS = [
    "Describe the following image in detail.",
    "Provide a detailed description of the given image.",
    "Give an elaborate explanation of the image you see.",
    "Share a comprehensive rundown of the presented image.",
    "Offer a thorough analysis of the image.",
    "Explain the various aspects of the image before you.",
    "Clarify the contents of the displayed image with great detail.",
    "Characterize the image using a well-detailed description.",
    "Break down the elements of the image in a detailed manner.",
    "Walk through the important details of the image.",
]

MULTI_TURN_GENERATION_PROMPT = """\
You are an AI visual assistant that excels at chart figures. You are provided \
with a text description (chart summary) of a chart image and raw data values \
about the same chart. You don't have access to the actual image. Your task is \
to design question-answer pair(s) between a person (User) inquiring about the \
chart image and you (Assistant) responding to their questions.

Below are requirements for generating the question-answer pair(s):
- The answers should be a single word or phrase, and in a tone that a visual \
AI assistant is seeing the chart figure and answering the question.
- Ask diverse questions and give corresponding answers. Include questions \
asking about (1) various comparative aspects of chart image data, \
relationships between data points, changes over time or categories, and \
presence within specific ranges. (2) various numerical knowledge of chart \
data, including sums, differences, averages, medians, ratios, and statistical \
evaluations within the context of chart elements like legend labels and axis \
ticks or statistical measures like standard deviation, variance, and \
correlation and so on.
- The conversation should include at least 2-3 turns of questions and answers.
- Only include questions that have definite answers:(1) one can see in the \
chart figure that the question asks about and can answer confidently; (2) one \
can determine confidently from the chart figure that it is not in the chart \
figure. Do not ask any question that cannot be answered confidently.
- In addition, you are provided with some examples of question-answer \
pair(s) between a user and you(assistant).
{in_context_examples}
The chart description: {chart_description}
The raw data: {raw_data}
"""
